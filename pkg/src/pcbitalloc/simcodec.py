"""Synthetic codec: ground-truth models plus seeded noise.

Stands in for a real geometry+color encoder during studies. Geometry
distortion is affine in the geometry step; color distortion is additive
in the two steps (optionally with an injected cross-coupling term to
stress that assumption); each bitstream follows a power law in its own
step. Observations can be perturbed by seeded noise: multiplicative
lognormal on rates, additive Gaussian scaled by the clean value on
distortions. Encoding is a pure function of (spec, qp): the generator is
PCG64 seeded from (spec.seed, qp_g, qp_c), so replays are bit-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .metrics import FitQuality, fit_quality
from .models import (
    DistortionModel,
    ProbeRecord,
    QpPair,
    RateModel,
    qp_to_step,
)

# Constant simulated wall time per encode call, so complexity quotients
# reduce to call-count ratios.
ENCODE_TIME_MS = 1000.0


@dataclass(frozen=True)
class SyntheticCodecSpec:
    alpha_g: float
    beta_g: float
    alpha_gc: float
    alpha_cc: float
    beta_c: float
    rate: RateModel
    noise_rel: float = 0.0
    coupling: float = 0.0
    overhead_kbpmp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.alpha_g, self.alpha_gc, self.alpha_cc) < 0:
            raise ValidationError("distortion slopes must be non-negative")
        if self.noise_rel < 0:
            raise ValidationError("noise_rel must be non-negative")
        if self.overhead_kbpmp < 0:
            raise ValidationError("overhead bitrate must be non-negative")

    def distortion_model(self, omega: float) -> DistortionModel:
        """Ground-truth combined distortion plane at a weighting factor."""
        if not 0.0 <= omega <= 1.0:
            raise ValidationError("omega must lie in [0, 1]")
        return DistortionModel(
            a=omega * self.alpha_g + (1.0 - omega) * self.alpha_gc,
            b=(1.0 - omega) * self.alpha_cc,
            c=omega * self.beta_g + (1.0 - omega) * self.beta_c,
            omega=omega,
        )


@dataclass(frozen=True)
class EncodeResult:
    qp: QpPair
    r_g: float
    r_c: float
    d_g: float
    d_c: float
    encode_time_ms: float = ENCODE_TIME_MS

    def to_record(self) -> ProbeRecord:
        return ProbeRecord(self.qp, self.r_g, self.r_c, self.d_g, self.d_c)


def encode(spec: SyntheticCodecSpec, qp: QpPair) -> EncodeResult:
    """Simulate one encoding at a QP pair; deterministic for fixed inputs."""
    q_g, q_c = qp_to_step(qp.qp_g), qp_to_step(qp.qp_c)
    d_g = spec.alpha_g * q_g + spec.beta_g
    d_c = (spec.alpha_gc * q_g + spec.alpha_cc * q_c + spec.beta_c
           + spec.coupling * q_g * q_c)
    r_g = spec.rate.gamma_g * q_g**spec.rate.theta_g
    r_c = spec.rate.gamma_c * q_c**spec.rate.theta_c
    if spec.noise_rel > 0:
        rng = np.random.default_rng((spec.seed, qp.qp_g, qp.qp_c))
        z = rng.standard_normal(4)
        r_g *= math.exp(spec.noise_rel * z[0])
        r_c *= math.exp(spec.noise_rel * z[1])
        d_g = max(0.0, d_g * (1.0 + spec.noise_rel * z[2]))
        d_c = max(0.0, d_c * (1.0 + spec.noise_rel * z[3]))
    return EncodeResult(qp, r_g, r_c, d_g, d_c)


def probe_schedule() -> tuple[QpPair, QpPair, QpPair]:
    """The three (geometry, color) QP pairs used for model fitting."""
    return (QpPair(33, 25), QpPair(34, 35), QpPair(24, 33))


def run_probe_schedule(spec: SyntheticCodecSpec) -> list[ProbeRecord]:
    return [encode(spec, qp).to_record() for qp in probe_schedule()]


@dataclass(frozen=True)
class SeparabilityReport:
    residual_fraction: float
    scc: float
    rmse: float
    grid_shape: tuple[int, int]


def validate_separability(spec: SyntheticCodecSpec,
                          qp_g_values: Sequence[int],
                          qp_c_values: Sequence[int]) -> SeparabilityReport:
    """Check that measured color distortion is additive in the two steps.

    Encodes the full product grid, least-squares fits the additive
    surface f_g(Qg) + f_c(Qc) (row/column means on a complete grid), and
    reports the residual cross-term energy as a fraction of the total
    variance plus the squared correlation of the additive fit.
    """
    qg = sorted(set(int(v) for v in qp_g_values))
    qc = sorted(set(int(v) for v in qp_c_values))
    if len(qg) < 4 or len(qc) < 4:
        raise ValidationError("separability grid must span at least 4x4 QP pairs")
    dc = np.array([[encode(spec, QpPair(g, c)).d_c for c in qc] for g in qg])
    grand = dc.mean()
    fit = dc.mean(axis=1, keepdims=True) + dc.mean(axis=0, keepdims=True) - grand
    ss_total = float(((dc - grand) ** 2).sum())
    ss_resid = float(((dc - fit) ** 2).sum())
    rmse = math.sqrt(ss_resid / dc.size)
    if ss_total == 0.0:
        return SeparabilityReport(0.0, 1.0, rmse, (len(qg), len(qc)))
    quality: FitQuality = fit_quality(dc.ravel(), fit.ravel())
    return SeparabilityReport(ss_resid / ss_total, quality.scc, rmse,
                              (len(qg), len(qc)))


def random_spec(seed: int, noise_rel: float = 0.0,
                coupling: float = 0.0) -> SyntheticCodecSpec:
    """Draw a well-posed synthetic codec from seeded, codec-plausible ranges."""
    rng = np.random.default_rng(seed)
    rate = RateModel(
        gamma_g=float(rng.uniform(500.0, 20000.0)),
        theta_g=float(rng.uniform(-1.8, -0.6)),
        gamma_c=float(rng.uniform(300.0, 10000.0)),
        theta_c=float(rng.uniform(-1.8, -0.6)),
    )
    return SyntheticCodecSpec(
        alpha_g=float(rng.uniform(0.01, 0.5)),
        beta_g=float(rng.uniform(0.1, 2.0)),
        alpha_gc=float(rng.uniform(0.0, 0.3)),
        alpha_cc=float(rng.uniform(0.05, 1.0)),
        beta_c=float(rng.uniform(0.5, 5.0)),
        rate=rate,
        noise_rel=noise_rel,
        coupling=coupling,
        seed=seed,
    )


def spec_to_dict(spec: SyntheticCodecSpec) -> dict:
    d = asdict(spec)
    d["rate"] = asdict(spec.rate)
    return d


def spec_from_dict(d: dict) -> SyntheticCodecSpec:
    try:
        rate = RateModel(**d["rate"])
        fields = {k: v for k, v in d.items() if k != "rate"}
        return SyntheticCodecSpec(rate=rate, **fields)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad codec spec: {exc}") from exc


def save_spec(spec: SyntheticCodecSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2, sort_keys=True))


def load_spec(path) -> SyntheticCodecSpec:
    return spec_from_dict(json.loads(Path(path).read_text()))


def perturbed(spec: SyntheticCodecSpec, **changes) -> SyntheticCodecSpec:
    """Copy of the spec with selected fields replaced."""
    return replace(spec, **changes)
