"""Point-to-point distortion metrics and fit-quality statistics.

The geometry error of cloud B against cloud A is the mean squared
Euclidean distance from each point of B to its nearest neighbor in A;
the color error applies the same neighbor assignment to the luma values.
Both are symmetrized by taking the max over the two directions. Squared
distances are integers (voxel coordinates are integers, luma is scaled
to an integer grid), so sums are accumulated exactly in arbitrary
precision and divided once at the end: results are reproducible
bit-for-bit regardless of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cloud import LUMA_SCALE, PointCloud, luma_scaled
from .errors import SccUndefinedError, ValidationError


@dataclass(frozen=True)
class DistortionPair:
    d_g: float
    d_c: float

    def __post_init__(self):
        if self.d_g < 0 or self.d_c < 0:
            raise ValidationError("distortions must be non-negative")


@dataclass(frozen=True)
class FitQuality:
    scc: float
    rmse: float
    nrmse: float


class NnIndex:
    """Nearest-neighbor index over one cloud's integer positions.

    Backed by a balanced kd-tree; every query is re-checked in exact
    integer arithmetic so the reported neighbor minimizes the exact
    squared distance, with ties broken by the smallest point index.
    """

    def __init__(self, cloud: PointCloud):
        if len(cloud) < 1:
            raise ValidationError("cannot index an empty cloud")
        self._points = cloud.positions
        self._tree = cKDTree(self._points.astype(np.float64), balanced_tree=True)

    def query(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest neighbors of integer query points.

        Returns (indices, squared_distances), both int64, one entry per
        query row. Exact for bit depths up to 25 (squared distances stay
        below 2^53 so the float kd-tree distance ranking is exact).
        """
        q = np.atleast_2d(np.asarray(queries, dtype=np.int64))
        dist, _ = self._tree.query(q.astype(np.float64), k=1)
        # Inflate the radius past sqrt rounding, then resolve exactly in ints.
        radius = dist * (1.0 + 1e-9) + 1e-9
        candidates = self._tree.query_ball_point(q.astype(np.float64), radius)
        n = len(q)
        out_idx = np.empty(n, dtype=np.int64)
        out_d2 = np.empty(n, dtype=np.int64)
        pts = self._points
        for j in range(n):
            cand = np.sort(np.asarray(candidates[j], dtype=np.int64))
            diff = pts[cand] - q[j]
            d2 = np.einsum("ij,ij->i", diff, diff)
            k = int(np.argmin(d2))  # argmin takes the first hit: smallest index
            out_idx[j] = cand[k]
            out_d2[j] = d2[k]
        return out_idx, out_d2


def build_index(cloud: PointCloud) -> NnIndex:
    return NnIndex(cloud)


def _exact_mean(int_values: np.ndarray, denom: int) -> float:
    total = int(np.asarray(int_values, dtype=object).sum())
    return total / denom


def geometry_error(b: PointCloud, a: PointCloud) -> float:
    """Directed geometry MSE of cloud b against reference a."""
    _, d2 = build_index(a).query(b.positions)
    return _exact_mean(d2, len(b))


def _directed_errors(b: PointCloud, a: PointCloud, index_a: NnIndex,
                     luma_weights: str) -> tuple[float, float]:
    nn, d2 = index_a.query(b.positions)
    e_g = _exact_mean(d2, len(b))
    yb = luma_scaled(b.colors, luma_weights)
    ya = luma_scaled(a.colors, luma_weights)[nn]
    dy = yb - ya
    e_c = _exact_mean(dy * dy, len(b) * LUMA_SCALE * LUMA_SCALE)
    return e_g, e_c


def symmetric_distortion(a: PointCloud, b: PointCloud,
                         luma_weights: str = "bt709") -> DistortionPair:
    """Symmetric point-to-point distortion: max over the two directions.

    The color error reuses the geometry neighbor assignment and compares
    luma values only.
    """
    idx_a = build_index(a)
    idx_b = build_index(b)
    eg_ba, ec_ba = _directed_errors(b, a, idx_a, luma_weights)
    eg_ab, ec_ab = _directed_errors(a, b, idx_b, luma_weights)
    return DistortionPair(max(eg_ba, eg_ab), max(ec_ba, ec_ab))


def combined_distortion(pair: DistortionPair, omega: float) -> float:
    """Weighted sum omega*d_g + (1-omega)*d_c."""
    if not 0.0 <= omega <= 1.0:
        raise ValidationError("omega must lie in [0, 1]")
    return omega * pair.d_g + (1.0 - omega) * pair.d_c


def psnr(d_g: float, d_c: float, omega: float,
         geometry_peak: float, color_peak: float) -> float:
    """PSNR in dB of the weighted normalized MSE; +inf when lossless."""
    if geometry_peak <= 0 or color_peak <= 0:
        raise ValidationError("peaks must be positive")
    if not 0.0 <= omega <= 1.0:
        raise ValidationError("omega must lie in [0, 1]")
    if d_g < 0 or d_c < 0:
        raise ValidationError("distortions must be non-negative")
    nmse = omega * d_g / geometry_peak**2 + (1.0 - omega) * d_c / color_peak**2
    if nmse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / nmse)


def fit_quality(actual, fitted) -> FitQuality:
    """Squared correlation, RMSE, and RMSE normalized by the largest observation."""
    x = np.asarray(actual, dtype=np.float64)
    y = np.asarray(fitted, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("actual and fitted must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValidationError("need at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise SccUndefinedError("correlation undefined for a constant reference")
    syy = float(yc @ yc)
    if syy == 0.0:
        scc = 0.0
    else:
        r = float(xc @ yc) / math.sqrt(sxx * syy)
        scc = min(r * r, 1.0)
    rmse = float(np.sqrt(np.mean((x - y) ** 2)))
    xmax = float(x.max())
    nrmse = rmse / xmax if xmax > 0 else math.nan
    return FitQuality(scc, rmse, nrmse)
