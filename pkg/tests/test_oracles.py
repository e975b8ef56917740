"""Sanity checks for the reference computations in oracles.py.

The oracles back the accuracy claims of the whole suite, so they are
validated here against closed forms and against one another before being
trusted anywhere else.
"""

import numpy as np
import pytest

from oracles import (
    laplacian_norm_dense,
    lstsq_affine,
    prox_objective_bruteforce,
    prox_tv_1d,
    smooth3d_direct,
    tv_by_neighbors,
    wilcoxon_enumeration,
)


class TestTvByNeighbors:
    def test_center_impulse(self):
        """Unit impulse in a 3x3x3 cube: three unit forward differences at
        the impulse and three entering it from axis-neighbours."""
        dense = np.zeros((3, 3, 3))
        dense[1, 1, 1] = 1.0
        flags = np.ones((3, 3, 3), dtype=bool)
        np.testing.assert_allclose(
            tv_by_neighbors(flags, dense), 3.0 + np.sqrt(3.0), rtol=1e-14
        )

    def test_constant_is_zero(self):
        flags = np.ones((4, 3, 2), dtype=bool)
        assert tv_by_neighbors(flags, np.full((4, 3, 2), 2.5)) == 0.0

    def test_two_point_step(self):
        flags = np.zeros((1, 1, 3), dtype=bool)
        flags[0, 0, :2] = True
        dense = np.zeros((1, 1, 3))
        dense[0, 0, 0] = 1.0
        dense[0, 0, 1] = 4.0
        assert tv_by_neighbors(flags, dense) == 3.0


class TestLaplacianNormDense:
    def test_two_voxel_chain(self):
        flags = np.ones((1, 1, 2), dtype=bool)
        np.testing.assert_allclose(laplacian_norm_dense(flags), 2.0, rtol=1e-12)

    def test_single_voxel(self):
        assert laplacian_norm_dense(np.ones((1, 1, 1), dtype=bool)) == 0.0

    def test_chain_closed_form(self):
        """1D chain of length n has largest Laplacian eigenvalue
        4 sin^2(pi (n-1) / 2n)."""
        for n in (2, 3, 5, 8):
            flags = np.ones((1, 1, n), dtype=bool)
            expected = 4.0 * np.sin(np.pi * (n - 1) / (2 * n)) ** 2
            np.testing.assert_allclose(
                laplacian_norm_dense(flags), expected, rtol=1e-12
            )


class TestProxTv1d:
    def test_two_point_closed_form(self):
        """On two points the prox moves both ends together by lam, clamping
        at the midpoint once |a - b| <= 2 lam."""
        rng = np.random.default_rng(42)
        for _ in range(50):
            a, b = rng.standard_normal(2) * 3.0
            lam = float(rng.uniform(0.01, 3.0))
            v = prox_tv_1d(np.array([a, b]), lam)
            if abs(a - b) > 2 * lam:
                shift = lam * np.sign(b - a)
                expected = np.array([a + shift, b - shift])
            else:
                expected = np.array([(a + b) / 2, (a + b) / 2])
            np.testing.assert_allclose(v, expected, atol=1e-9)

    def test_constant_fixed_point(self):
        v = prox_tv_1d(np.full(7, 3.25), 1.7)
        np.testing.assert_allclose(v, np.full(7, 3.25), rtol=0, atol=0)

    def test_large_lam_gives_mean(self):
        rng = np.random.default_rng(3)
        w = rng.standard_normal(9)
        v = prox_tv_1d(w, 100.0)
        np.testing.assert_allclose(v, np.full(9, w.mean()), atol=1e-9)

    def test_mean_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            w = rng.standard_normal(int(rng.integers(2, 20)))
            v = prox_tv_1d(w, float(rng.uniform(0.05, 2.0)))
            np.testing.assert_allclose(v.sum(), w.sum(), atol=1e-10)

    def test_agrees_with_bruteforce_objective(self):
        """Cross-check the two independent small-problem oracles."""
        rng = np.random.default_rng(5)
        flags = np.ones((1, 1, 3), dtype=bool)
        for _ in range(5):
            w = rng.standard_normal(3)
            lam = float(rng.uniform(0.1, 1.0))
            v = prox_tv_1d(w, lam)
            obj_cd = 0.5 * ((v - w) ** 2).sum() + lam * np.abs(np.diff(v)).sum()
            obj_bf = prox_objective_bruteforce(flags, w.reshape(1, 1, 3), lam)
            np.testing.assert_allclose(obj_cd, obj_bf, atol=1e-7)


class TestWilcoxonEnumeration:
    def test_identical_scores(self):
        assert wilcoxon_enumeration([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_five_one_sided(self):
        """All five differences positive with distinct magnitudes: the only
        as-extreme assignments are all-plus and all-minus, p = 2/32."""
        a = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        assert wilcoxon_enumeration(a, np.zeros(5)) == pytest.approx(2 / 32)

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = rng.standard_normal(7)
            b = rng.standard_normal(7)
            assert wilcoxon_enumeration(a, b) == pytest.approx(
                wilcoxon_enumeration(b, a)
            )

    def test_in_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.standard_normal(6)
            b = rng.standard_normal(6)
            p = wilcoxon_enumeration(a, b)
            assert 0.0 < p <= 1.0


class TestSmooth3dDirect:
    def test_sigma_zero_identity(self):
        rng = np.random.default_rng(8)
        arr = rng.standard_normal((4, 4, 4))
        np.testing.assert_array_equal(smooth3d_direct(arr, 0.0), arr)

    def test_constant_unchanged(self):
        arr = np.full((5, 5, 5), 1.5)
        np.testing.assert_allclose(smooth3d_direct(arr, 1.0), arr, rtol=1e-12)

    def test_impulse_center_weight(self):
        """Smoothing a centered impulse leaves the cubed central kernel
        weight at the center (window fully interior for sigma = 1)."""
        arr = np.zeros((9, 9, 9))
        arr[4, 4, 4] = 1.0
        out = smooth3d_direct(arr, 1.0)
        x = np.arange(-4, 5)
        k1 = np.exp(-(x * x) / 2.0)
        k1 /= k1.sum()
        np.testing.assert_allclose(out[4, 4, 4], k1[4] ** 3, rtol=1e-12)


class TestLstsqAffine:
    def test_exact_affine_data(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((30, 4))
        w = rng.standard_normal(4)
        y = x @ w + 2.5
        w_hat, b_hat = lstsq_affine(x, y)
        np.testing.assert_allclose(w_hat, w, atol=1e-10)
        np.testing.assert_allclose(b_hat, 2.5, atol=1e-10)
