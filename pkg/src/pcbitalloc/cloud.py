"""Voxelized point clouds with per-point color, plus PLY ingestion.

A cloud is a pair of parallel arrays: integer voxel positions and 8-bit
RGB colors, together with the voxel-grid bit depth. Both PLY variants in
common use are supported: ``format ascii 1.0`` and
``format binary_little_endian 1.0``, with vertex properties x,y,z
(float32 or int32) and red,green,blue (uint8). Unknown scalar vertex
properties are skipped with a warning. The writer records the bit depth
in a ``comment bit_depth N`` line so a save/load round trip restores it;
absent that, the smallest depth containing all coordinates is used.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NewType

import numpy as np

from .errors import PlyBodyError, PlyHeaderError, PlyPropertyError, ValidationError

Luma = NewType("Luma", float)

# Integer per-10000 luma weights; both rows sum to exactly 10000 so white maps to 255.
LUMA_WEIGHTS = {
    "bt709": (2126, 7152, 722),
    "bt601": (2990, 5870, 1140),
}
LUMA_SCALE = 10000

_PLY_SCALAR_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4,
    "double": 8, "float64": 8,
}
_PLY_STRUCT_CODES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f",
    "double": "d", "float64": "d",
}


@dataclass(frozen=True)
class PointCloud:
    """Immutable voxelized cloud: positions (n,3) int64, colors (n,3) uint8."""

    positions: np.ndarray
    colors: np.ndarray
    bit_depth: int

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.int64))
        col = np.ascontiguousarray(np.asarray(self.colors, dtype=np.uint8))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError("positions must have shape (n, 3)")
        if col.shape != pos.shape:
            raise ValidationError("colors must match positions in shape")
        if len(pos) < 1:
            raise ValidationError("cloud must contain at least one point")
        if not isinstance(self.bit_depth, int) or self.bit_depth < 1:
            raise ValidationError("bit_depth must be a positive integer")
        hi = 1 << self.bit_depth
        if pos.min() < 0 or pos.max() >= hi:
            raise ValidationError(
                f"coordinates must lie in [0, 2^{self.bit_depth})"
            )
        pos.setflags(write=False)
        col.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)

    def __len__(self) -> int:
        return len(self.positions)


def min_bit_depth(positions) -> int:
    """Smallest depth d with every coordinate in [0, 2^d)."""
    m = int(np.max(positions))
    d = 1
    while (1 << d) <= m:
        d += 1
    return d


def luminance(color, weights: str = "bt709") -> Luma:
    """Y value of an 8-bit (R,G,B) triple, real-valued and unrounded."""
    r, g, b = (int(c) for c in color)
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValidationError("color channels must lie in [0, 255]")
    wr, wg, wb = LUMA_WEIGHTS[weights]
    return Luma((wr * r + wg * g + wb * b) / LUMA_SCALE)


def luma_scaled(colors: np.ndarray, weights: str = "bt709") -> np.ndarray:
    """Per-point luma times LUMA_SCALE as exact int64 (for integer metric sums)."""
    wr, wg, wb = LUMA_WEIGHTS[weights]
    c = np.asarray(colors, dtype=np.int64)
    return wr * c[:, 0] + wg * c[:, 1] + wb * c[:, 2]


def _parse_header(fh):
    """Read the PLY header; returns (fmt, n_vertex, properties, bit_depth_hint)."""
    magic = fh.readline()
    if magic.strip() != b"ply":
        raise PlyHeaderError("not a PLY file (missing 'ply' magic)")
    fmt = None
    n_vertex = None
    props = []
    bit_depth_hint = None
    in_vertex = False
    seen_other_element = False
    while True:
        raw = fh.readline()
        if not raw:
            raise PlyHeaderError("header ended before end_header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] not in ("ascii", "binary_little_endian"):
                raise PlyHeaderError(f"unsupported format line: {line!r}")
            fmt = tok[1]
        elif tok[0] == "comment":
            if len(tok) >= 3 and tok[1] == "bit_depth":
                try:
                    bit_depth_hint = int(tok[2])
                except ValueError:
                    pass
        elif tok[0] == "element":
            if len(tok) != 3:
                raise PlyHeaderError(f"malformed element line: {line!r}")
            if tok[1] == "vertex":
                if seen_other_element:
                    raise PlyHeaderError("vertex element must come first")
                try:
                    n_vertex = int(tok[2])
                except ValueError:
                    raise PlyHeaderError(f"bad vertex count: {tok[2]!r}")
                in_vertex = True
            else:
                in_vertex = False
                seen_other_element = True
        elif tok[0] == "property":
            if in_vertex:
                if tok[1] == "list":
                    raise PlyHeaderError("list properties on vertices are not supported")
                if len(tok) != 3:
                    raise PlyHeaderError(f"malformed property line: {line!r}")
                ptype, pname = tok[1], tok[2]
                if ptype not in _PLY_SCALAR_SIZES:
                    raise PlyHeaderError(f"unknown property type {ptype!r}")
                props.append((pname, ptype))
        elif tok[0] == "end_header":
            break
        else:
            raise PlyHeaderError(f"unrecognized header line: {line!r}")
    if fmt is None:
        raise PlyHeaderError("header has no format line")
    if n_vertex is None:
        raise PlyHeaderError("header declares no vertex element")
    return fmt, n_vertex, props, bit_depth_hint


def _locate_columns(props):
    names = [p[0] for p in props]
    for want in ("x", "y", "z"):
        if want not in names:
            raise PlyPropertyError(f"vertex property {want!r} is missing")
    for want in ("red", "green", "blue"):
        if want not in names:
            raise PlyPropertyError(f"color property {want!r} is missing")
    known = {"x", "y", "z", "red", "green", "blue"}
    extra = [n for n in names if n not in known]
    if extra:
        warnings.warn(f"skipping unknown vertex properties: {', '.join(extra)}")
    return {n: names.index(n) for n in known}


def _round_coords(values: np.ndarray) -> np.ndarray:
    # np.rint rounds halves to even, matching the documented convention
    return np.rint(values).astype(np.int64)


def load_ply(path) -> PointCloud:
    """Parse a PLY file (ascii or binary little-endian) into a PointCloud."""
    path = Path(path)
    with open(path, "rb") as fh:
        fmt, n_vertex, props, bit_depth_hint = _parse_header(fh)
        if n_vertex < 1:
            raise PlyHeaderError("vertex count must be >= 1")
        cols = _locate_columns(props)
        if fmt == "ascii":
            rows = []
            for i in range(n_vertex):
                raw = fh.readline()
                if not raw:
                    raise PlyBodyError(f"vertex data truncated at row {i}")
                fields = raw.split()
                if len(fields) < len(props):
                    raise PlyBodyError(f"vertex row {i} has too few fields")
                try:
                    rows.append([float(fields[k]) for k in range(len(props))])
                except ValueError as exc:
                    raise PlyBodyError(f"vertex row {i}: {exc}") from None
            data = np.asarray(rows, dtype=np.float64)
        else:
            codes = "<" + "".join(_PLY_STRUCT_CODES[t] for _, t in props)
            stride = struct.calcsize(codes)
            blob = fh.read(stride * n_vertex)
            if len(blob) < stride * n_vertex:
                raise PlyBodyError(
                    f"binary body truncated: expected {stride * n_vertex} bytes, "
                    f"got {len(blob)}"
                )
            it = struct.iter_unpack(codes, blob)
            data = np.asarray([row for row in it], dtype=np.float64)

    xyz = np.stack(
        [data[:, cols["x"]], data[:, cols["y"]], data[:, cols["z"]]], axis=1
    )
    rgb = np.stack(
        [data[:, cols["red"]], data[:, cols["green"]], data[:, cols["blue"]]], axis=1
    )
    positions = _round_coords(xyz)
    if rgb.min() < 0 or rgb.max() > 255:
        raise PlyBodyError("color values outside [0, 255]")
    colors = rgb.astype(np.uint8)
    if positions.min() < 0:
        raise ValidationError("negative coordinates after rounding")
    bit_depth = bit_depth_hint if bit_depth_hint else min_bit_depth(positions)
    return PointCloud(positions, colors, bit_depth)


def save_ply(cloud: PointCloud, path, binary: bool = False,
             coord_dtype: str = "float32") -> None:
    """Write a cloud as PLY; the bit depth is preserved in a header comment."""
    if coord_dtype not in ("float32", "int32"):
        raise ValidationError("coord_dtype must be 'float32' or 'int32'")
    if coord_dtype == "float32" and cloud.bit_depth > 24:
        # float32 cannot hold >24-bit integers exactly
        coord_dtype = "int32"
    fmt = "binary_little_endian" if binary else "ascii"
    ctype = "float" if coord_dtype == "float32" else "int"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"comment bit_depth {cloud.bit_depth}\n"
        f"element vertex {len(cloud)}\n"
        f"property {ctype} x\n"
        f"property {ctype} y\n"
        f"property {ctype} z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        pos = cloud.positions
        col = cloud.colors
        if binary:
            code = "<fffBBB" if coord_dtype == "float32" else "<iiiBBB"
            pack = struct.Struct(code).pack
            for p, c in zip(pos, col):
                if coord_dtype == "float32":
                    fh.write(pack(float(p[0]), float(p[1]), float(p[2]),
                                  int(c[0]), int(c[1]), int(c[2])))
                else:
                    fh.write(pack(int(p[0]), int(p[1]), int(p[2]),
                                  int(c[0]), int(c[1]), int(c[2])))
        else:
            lines = []
            for p, c in zip(pos, col):
                if coord_dtype == "float32":
                    coords = f"{float(p[0]):g} {float(p[1]):g} {float(p[2]):g}"
                else:
                    coords = f"{int(p[0])} {int(p[1])} {int(p[2])}"
                lines.append(f"{coords} {int(c[0])} {int(c[1])} {int(c[2])}\n")
            fh.write("".join(lines).encode("ascii"))
