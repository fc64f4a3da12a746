"""Shared fixtures: random clouds, brute-force metric oracles, solver instances."""

import numpy as np
import pytest

from pcbitalloc.cloud import LUMA_SCALE, PointCloud, luma_scaled
from pcbitalloc.simcodec import random_spec


def make_cloud(rng, n, bit_depth=10):
    hi = 1 << bit_depth
    return PointCloud(
        rng.integers(0, hi, (n, 3)),
        rng.integers(0, 256, (n, 3)),
        bit_depth,
    )


def brute_force_nn(points, queries, chunk=256):
    """O(n*m) exact nearest neighbors: (indices, squared distances) in int64.

    np.argmin returns the first minimum, which is the smallest point index.
    """
    pts = np.asarray(points, dtype=np.int64)
    qs = np.asarray(queries, dtype=np.int64)
    idx = np.empty(len(qs), dtype=np.int64)
    d2 = np.empty(len(qs), dtype=np.int64)
    for i in range(0, len(qs), chunk):
        blk = qs[i:i + chunk]
        diff = blk[:, None, :] - pts[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        best = np.argmin(dist, axis=1)
        idx[i:i + chunk] = best
        d2[i:i + chunk] = dist[np.arange(len(blk)), best]
    return idx, d2


def brute_directed_errors(b, a, luma_weights="bt709"):
    """Directed geometry and color errors of b against a, exact arithmetic."""
    nn, d2 = brute_force_nn(a.positions, b.positions)
    e_g = int(d2.astype(object).sum()) / len(b)
    dy = luma_scaled(b.colors, luma_weights) - luma_scaled(a.colors, luma_weights)[nn]
    e_c = int((dy * dy).astype(object).sum()) / (len(b) * LUMA_SCALE * LUMA_SCALE)
    return e_g, e_c


def brute_symmetric(a, b, luma_weights="bt709"):
    eg1, ec1 = brute_directed_errors(b, a, luma_weights)
    eg2, ec2 = brute_directed_errors(a, b, luma_weights)
    return max(eg1, eg2), max(ec1, ec2)


def well_posed_instance(seed):
    """Random codec-plausible allocation instance with a feasible coarse start.

    The budget is the true rate at a uniformly drawn interior step pair, so
    every instance is solvable from the (80, 80) start.
    """
    rng = np.random.default_rng((77, seed))
    attempt = 0
    while True:
        spec = random_spec(seed=int(rng.integers(0, 2**31)))
        omega = 0.5 if (seed + attempt) % 2 == 0 else 0.25
        rm = spec.rate
        qg_t, qc_t = rng.uniform(8.0, 80.0, 2)
        r_target = rm.gamma_g * qg_t**rm.theta_g + rm.gamma_c * qc_t**rm.theta_c
        r_start = rm.gamma_g * 80.0**rm.theta_g + rm.gamma_c * 80.0**rm.theta_c
        if r_target > r_start * 1.001:
            return spec, omega, r_target
        attempt += 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
