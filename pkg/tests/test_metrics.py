import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcbitalloc.cloud import PointCloud
from pcbitalloc.errors import SccUndefinedError, ValidationError
from pcbitalloc.metrics import (
    DistortionPair,
    build_index,
    combined_distortion,
    fit_quality,
    geometry_error,
    psnr,
    symmetric_distortion,
)

from conftest import brute_force_nn, brute_symmetric, make_cloud


class TestNnIndex:
    def test_single_point(self):
        c = PointCloud([[3, 3, 3]], [[0, 0, 0]], 2)
        idx, d2 = build_index(c).query([[0, 0, 0], [3, 3, 3]])
        assert idx.tolist() == [0, 0]
        assert d2.tolist() == [27, 0]

    def test_duplicate_tie_goes_to_smallest_index(self):
        pos = [[0, 0, 0], [5, 5, 5], [9, 9, 9], [1, 1, 1],
               [7, 7, 7], [2, 2, 2], [8, 8, 8], [1, 1, 1]]
        c = PointCloud(pos, np.zeros((8, 3)), 4)
        idx, d2 = build_index(c).query([[1, 1, 1]])
        assert idx.tolist() == [3]
        assert d2.tolist() == [0]

    def test_equidistant_tie(self):
        # (0,0,0) and (2,0,0) are both at distance 1 from (1,0,0)
        c = PointCloud([[2, 0, 0], [0, 0, 0]], np.zeros((2, 3)), 2)
        idx, d2 = build_index(c).query([[1, 0, 0]])
        assert idx.tolist() == [0]
        assert d2.tolist() == [1]

    def test_matches_linear_scan_2000(self, rng):
        cloud = make_cloud(rng, 2000, bit_depth=9)
        queries = rng.integers(0, 512, (2000, 3))
        idx, d2 = build_index(cloud).query(queries)
        want_idx, want_d2 = brute_force_nn(cloud.positions, queries)
        assert (idx == want_idx).all()
        assert (d2 == want_d2).all()

    def test_matches_linear_scan_5000(self, rng):
        cloud = make_cloud(rng, 5000, bit_depth=12)
        queries = rng.integers(0, 4096, (5000, 3))
        idx, d2 = build_index(cloud).query(queries)
        want_idx, want_d2 = brute_force_nn(cloud.positions, queries)
        assert (idx == want_idx).all()
        assert (d2 == want_d2).all()

    def test_matches_linear_scan_with_duplicates(self, rng):
        base = rng.integers(0, 64, (300, 3))
        pos = np.vstack([base, base[rng.integers(0, 300, 200)]])
        cloud = PointCloud(pos, rng.integers(0, 256, (500, 3)), 6)
        queries = rng.integers(0, 64, (500, 3))
        idx, d2 = build_index(cloud).query(queries)
        want_idx, want_d2 = brute_force_nn(cloud.positions, queries)
        assert (idx == want_idx).all()
        assert (d2 == want_d2).all()


class TestGeometryError:
    def test_identity_is_zero(self, rng):
        c = make_cloud(rng, 100)
        assert geometry_error(c, c) == 0.0

    def test_hand_case(self):
        a = PointCloud([[0, 0, 0]], [[0, 0, 0]], 3)
        b = PointCloud([[1, 0, 0], [0, 2, 0]], [[0, 0, 0], [0, 0, 0]], 3)
        assert geometry_error(b, a) == pytest.approx(2.5)

    def test_matches_brute_force(self, rng):
        for _ in range(5):
            a = make_cloud(rng, 500, bit_depth=8)
            b = make_cloud(rng, 500, bit_depth=8)
            _, d2 = brute_force_nn(a.positions, b.positions)
            want = int(d2.astype(object).sum()) / len(b)
            assert geometry_error(b, a) == want

    def test_permutation_invariant(self, rng):
        a = make_cloud(rng, 200)
        b = make_cloud(rng, 300)
        perm_a = rng.permutation(len(a))
        perm_b = rng.permutation(len(b))
        a2 = PointCloud(a.positions[perm_a], a.colors[perm_a], a.bit_depth)
        b2 = PointCloud(b.positions[perm_b], b.colors[perm_b], b.bit_depth)
        assert geometry_error(b, a) == geometry_error(b2, a2)


class TestSymmetricDistortion:
    def test_identity(self, rng):
        c = make_cloud(rng, 50)
        pair = symmetric_distortion(c, c)
        assert pair.d_g == 0.0 and pair.d_c == 0.0

    def test_single_gray_pair(self):
        # luma 100 against luma 110 at the same voxel
        a = PointCloud([[0, 0, 0]], [[100, 100, 100]], 1)
        b = PointCloud([[0, 0, 0]], [[110, 110, 110]], 1)
        pair = symmetric_distortion(a, b)
        assert pair.d_g == 0.0
        assert pair.d_c == pytest.approx(100.0)

    def test_matches_brute_force(self, rng):
        for _ in range(3):
            a = make_cloud(rng, 300, bit_depth=7)
            b = make_cloud(rng, 250, bit_depth=7)
            got = symmetric_distortion(a, b)
            want_g, want_c = brute_symmetric(a, b)
            assert got.d_g == want_g
            assert got.d_c == want_c

    def test_symmetric_in_arguments(self, rng):
        a = make_cloud(rng, 120)
        b = make_cloud(rng, 80)
        ab = symmetric_distortion(a, b)
        ba = symmetric_distortion(b, a)
        assert ab == ba

    def test_bt601_option(self, rng):
        a = make_cloud(rng, 60)
        b = make_cloud(rng, 60)
        got = symmetric_distortion(a, b, luma_weights="bt601")
        want_g, want_c = brute_symmetric(a, b, luma_weights="bt601")
        assert got.d_g == want_g and got.d_c == want_c


class TestCombinedDistortion:
    def test_half(self):
        assert combined_distortion(DistortionPair(4, 2), 0.5) == 3.0

    def test_pure_geometry(self):
        assert combined_distortion(DistortionPair(4, 2), 1.0) == 4.0

    def test_hand_case(self):
        assert combined_distortion(DistortionPair(1.2, 3.6), 0.25) == pytest.approx(3.0)

    def test_omega_out_of_range(self):
        with pytest.raises(ValidationError):
            combined_distortion(DistortionPair(1, 1), 1.5)

    @settings(max_examples=50)
    @given(st.floats(0, 100), st.floats(0, 100),
           st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_linear_in_omega(self, d_g, d_c, w1, w2, lam):
        pair = DistortionPair(d_g, d_c)
        mid = lam * w1 + (1 - lam) * w2
        direct = combined_distortion(pair, mid)
        blended = lam * combined_distortion(pair, w1) + (1 - lam) * combined_distortion(pair, w2)
        assert direct == pytest.approx(blended, abs=1e-9)


class TestPsnr:
    def test_20db(self):
        # weighted NMSE 0.01: d_g/peak^2 = 0.01 with omega 1
        assert psnr(0.01, 0.0, 1.0, 1.0, 1.0) == pytest.approx(20.0)

    def test_0db(self):
        assert psnr(1.0, 1.0, 0.5, 1.0, 1.0) == pytest.approx(0.0)

    def test_lossless_infinite(self):
        assert psnr(0.0, 0.0, 0.5, 1023.0, 255.0) == math.inf

    def test_bad_peak(self):
        with pytest.raises(ValidationError):
            psnr(1.0, 1.0, 0.5, 0.0, 255.0)

    def test_strictly_decreasing_in_each_distortion(self, rng):
        for _ in range(20):
            d_g, d_c = rng.uniform(0.01, 50, 2)
            base = psnr(d_g, d_c, 0.5, 1023, 255)
            assert psnr(d_g * 1.01, d_c, 0.5, 1023, 255) < base
            assert psnr(d_g, d_c * 1.01, 0.5, 1023, 255) < base


class TestFitQuality:
    def test_perfect_fit(self):
        fq = fit_quality([1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
        assert fq.scc == pytest.approx(1.0)
        assert fq.rmse == 0.0

    def test_constant_offset(self):
        fq = fit_quality([0, 1, 2, 3], [0.1, 1.1, 2.1, 3.1])
        assert fq.scc == pytest.approx(1.0)
        assert fq.rmse == pytest.approx(0.1)
        assert fq.nrmse == pytest.approx(0.1 / 3)

    def test_constant_actual_rejected(self):
        with pytest.raises(SccUndefinedError):
            fit_quality([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_noisy_regression_rmse(self):
        # sigma-0.5 residuals around a least-squares line: rmse near 0.5
        gen = np.random.default_rng(424242)
        x = np.linspace(0, 10, 1000)
        y = 3.0 * x + 1.0 + gen.normal(0, 0.5, 1000)
        coeffs = np.polyfit(x, y, 1)
        fitted = np.polyval(coeffs, x)
        fq = fit_quality(y, fitted)
        assert 0.3 <= fq.rmse <= 0.7
        assert fq.scc > 0.99
