"""Analytic rate and distortion models fitted from probe encodings.

Distortion is affine in the two quantization steps, D = a*Qg + b*Qc + c,
and each bitstream follows a power law in its own step, R = gamma*Q**theta
with theta < 0. Three probe encodings identify the distortion plane
exactly (3x3 linear solve); two probes identify each power law exactly
(2x2 log-linear solve). Overdetermined least-squares variants exist for
model-accuracy studies with longer probe logs.

All fitting happens in the step domain; quantization parameters are
mapped through the standard step = 2**((qp-4)/6) rule first. Bitrates
are kilobits per million points (kbpmp) throughout.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateProbesError, NonMonotoneRateError, ValidationError

QP_MIN = 22
QP_MAX = 42

PROBE_LOG_HEADER = ("qp_g", "qp_c", "r_g_kbpmp", "r_c_kbpmp", "d_g", "d_c")


class ModelSanityWarning(UserWarning):
    """Fitted distortion slope is negative; the model is suspect."""


def qp_to_step(qp) -> float:
    """Quantization step for a quantization parameter: 2**((qp-4)/6)."""
    if qp < 0:
        raise ValidationError("qp must be non-negative")
    return 2.0 ** ((qp - 4) / 6.0)


def qp_grid() -> tuple[int, ...]:
    return tuple(range(QP_MIN, QP_MAX + 1))


def step_grid() -> tuple[float, ...]:
    return tuple(qp_to_step(qp) for qp in qp_grid())


def kbpmp(bits: float, n_points: int) -> float:
    """Convert a raw bit count into kilobits per million points."""
    if n_points <= 0:
        raise ValidationError("point count must be positive")
    return (bits / 1000.0) / (n_points / 1e6)


@dataclass(frozen=True)
class QuantPair:
    q_g: float
    q_c: float

    def __post_init__(self):
        if self.q_g <= 0 or self.q_c <= 0:
            raise ValidationError("quantization steps must be positive")


@dataclass(frozen=True, order=True)
class QpPair:
    qp_g: int
    qp_c: int

    def __post_init__(self):
        for qp in (self.qp_g, self.qp_c):
            if not QP_MIN <= qp <= QP_MAX:
                raise ValidationError(f"qp {qp} outside grid [{QP_MIN}, {QP_MAX}]")

    def steps(self) -> QuantPair:
        return QuantPair(qp_to_step(self.qp_g), qp_to_step(self.qp_c))


@dataclass(frozen=True)
class ProbePoint:
    """One pre-encoding observation at a QP pair, with D already combined."""

    qp: QpPair
    r_g: float
    r_c: float
    d: float

    def __post_init__(self):
        if self.r_g <= 0 or self.r_c <= 0:
            raise ValidationError("probe bitrates must be positive")
        if self.d < 0:
            raise ValidationError("probe distortion must be non-negative")


@dataclass(frozen=True)
class ProbeRecord:
    """Raw probe log row; keeps d_g and d_c apart so one log serves any omega."""

    qp: QpPair
    r_g: float
    r_c: float
    d_g: float
    d_c: float

    def to_probe_point(self, omega: float) -> ProbePoint:
        if not 0.0 <= omega <= 1.0:
            raise ValidationError("omega must lie in [0, 1]")
        return ProbePoint(self.qp, self.r_g, self.r_c,
                          omega * self.d_g + (1.0 - omega) * self.d_c)


@dataclass(frozen=True)
class DistortionModel:
    a: float
    b: float
    c: float
    omega: float
    sanity: tuple[str, ...] = field(default=(), compare=False)

    @property
    def well_behaved(self) -> bool:
        return self.a >= 0 and self.b >= 0


@dataclass(frozen=True)
class RateModel:
    gamma_g: float
    theta_g: float
    gamma_c: float
    theta_c: float

    def __post_init__(self):
        if self.gamma_g <= 0 or self.gamma_c <= 0:
            raise ValidationError("rate model gammas must be positive")
        if self.theta_g >= 0 or self.theta_c >= 0:
            raise NonMonotoneRateError("rate exponents must be negative")


class RatePrediction(NamedTuple):
    r_g: float
    r_c: float
    total: float


def predict_distortion(m: DistortionModel, q: QuantPair) -> float:
    return m.a * q.q_g + m.b * q.q_c + m.c


def predict_rate(m: RateModel, q: QuantPair) -> RatePrediction:
    r_g = m.gamma_g * q.q_g**m.theta_g
    r_c = m.gamma_c * q.q_c**m.theta_c
    return RatePrediction(r_g, r_c, r_g + r_c)


def _fit_power_law(q1: float, r1: float, q2: float, r2: float,
                   label: str) -> tuple[float, float]:
    if r1 <= 0 or r2 <= 0:
        raise ValidationError(f"{label} rates must be positive")
    if q1 == q2:
        raise DegenerateProbesError(f"{label} steps are equal; power law unidentifiable")
    theta = math.log(r1 / r2) / math.log(q1 / q2)
    if theta >= 0:
        raise NonMonotoneRateError(
            f"{label} exponent {theta:.4g} is not negative; rate does not decay"
        )
    gamma = r1 / q1**theta
    return gamma, theta


def fit_rate_model(p1: ProbePoint, p2: ProbePoint) -> RateModel:
    """Exact power-law fit from two probes, separately for geometry and color."""
    s1, s2 = p1.qp.steps(), p2.qp.steps()
    gamma_g, theta_g = _fit_power_law(s1.q_g, p1.r_g, s2.q_g, p2.r_g, "geometry")
    gamma_c, theta_c = _fit_power_law(s1.q_c, p1.r_c, s2.q_c, p2.r_c, "color")
    return RateModel(gamma_g, theta_g, gamma_c, theta_c)


def fit_rate_model_lstsq(probes: Sequence[ProbePoint]) -> RateModel:
    """Log-log least-squares power-law fit over 2+ probes."""
    if len(probes) < 2:
        raise ValidationError("need at least two probes")
    qg = np.array([p.qp.steps().q_g for p in probes])
    qc = np.array([p.qp.steps().q_c for p in probes])
    rg = np.array([p.r_g for p in probes])
    rc = np.array([p.r_c for p in probes])

    def solve(q, r, label):
        if np.ptp(q) == 0:
            raise DegenerateProbesError(f"{label} steps are all equal")
        th, lg = np.polyfit(np.log(q), np.log(r), 1)
        if th >= 0:
            raise NonMonotoneRateError(f"{label} exponent {th:.4g} is not negative")
        return math.exp(lg), float(th)

    gamma_g, theta_g = solve(qg, rg, "geometry")
    gamma_c, theta_c = solve(qc, rc, "color")
    return RateModel(gamma_g, theta_g, gamma_c, theta_c)


def _finish_distortion_fit(a: float, b: float, c: float,
                           omega: float) -> DistortionModel:
    notes = []
    if a < 0:
        notes.append(f"geometry slope a={a:.4g} is negative")
    if b < 0:
        notes.append(f"color slope b={b:.4g} is negative")
    if notes:
        warnings.warn("; ".join(notes), ModelSanityWarning, stacklevel=3)
    return DistortionModel(a, b, c, omega, tuple(notes))


def fit_distortion_model(p1: ProbePoint, p2: ProbePoint, p3: ProbePoint,
                         omega: float) -> DistortionModel:
    """Exact affine fit D = a*Qg + b*Qc + c through three probes.

    The 3x3 system is solved by LU elimination with partial pivoting.
    Negative slopes are allowed but flagged on the result and warned about.
    """
    probes = (p1, p2, p3)
    mat = np.array([[p.qp.steps().q_g, p.qp.steps().q_c, 1.0] for p in probes])
    rhs = np.array([p.d for p in probes])
    if np.linalg.cond(mat) > 1e12:
        raise DegenerateProbesError(
            "probe step pairs are collinear; distortion plane unidentifiable"
        )
    a, b, c = np.linalg.solve(mat, rhs)
    return _finish_distortion_fit(float(a), float(b), float(c), omega)


def fit_distortion_model_lstsq(probes: Sequence[ProbePoint],
                               omega: float) -> DistortionModel:
    """Least-squares affine fit over 3+ probes."""
    if len(probes) < 3:
        raise ValidationError("need at least three probes")
    mat = np.array([[p.qp.steps().q_g, p.qp.steps().q_c, 1.0] for p in probes])
    rhs = np.array([p.d for p in probes])
    if np.linalg.matrix_rank(mat) < 3:
        raise DegenerateProbesError("probe step pairs are collinear")
    (a, b, c), *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    return _finish_distortion_fit(float(a), float(b), float(c), omega)


def probes_from_records(records: Sequence[ProbeRecord],
                        omega: float) -> list[ProbePoint]:
    return [r.to_probe_point(omega) for r in records]


def read_probe_log(path) -> list[ProbeRecord]:
    """Read the probe-log CSV (header qp_g,qp_c,r_g_kbpmp,r_c_kbpmp,d_g,d_c)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != PROBE_LOG_HEADER:
            raise ValidationError(
                f"probe log must start with header {','.join(PROBE_LOG_HEADER)}"
            )
        records = []
        for row in reader:
            try:
                qp = QpPair(int(row["qp_g"]), int(row["qp_c"]))
                records.append(ProbeRecord(
                    qp,
                    float(row["r_g_kbpmp"]), float(row["r_c_kbpmp"]),
                    float(row["d_g"]), float(row["d_c"]),
                ))
            except (TypeError, ValueError, KeyError) as exc:
                raise ValidationError(f"bad probe log row {row!r}") from exc
    return records


def write_probe_log(path, records: Sequence[ProbeRecord],
                    append: bool = False) -> None:
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(PROBE_LOG_HEADER)
        for r in records:
            writer.writerow([r.qp.qp_g, r.qp.qp_c,
                             repr(r.r_g), repr(r.r_c), repr(r.d_g), repr(r.d_c)])
