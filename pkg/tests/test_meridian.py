"""Two-point covariance on the meridian, Gaussian pair sampling, and the
two-point zero-set correlation, checked against finite-difference and
moment oracles."""

import math

import numpy as np
import pytest

from nodalvol.geometry import sphere_area
from nodalvol.meridian import (
    _gaussian_norm_mean,
    _pair_norm_product_mean,
    build_sigma,
    kacrice_c_constant,
    meridian_rho,
    normalized_corr,
    sample_pairs,
    two_point_kacrice,
    two_point_kacrice_exact,
)
from nodalvol.geometry import mean_nodal_volume
from nodalvol.specfun import eigenvalue, gegenbauer


def _rho_fd_oracle(theta, ell, d, h=1e-5):
    """Correlation entries rebuilt from central differences of the kernel
    values only (no analytic derivatives)."""
    t = math.cos(theta)
    g = lambda x: gegenbauer(ell, d, x).value
    g1 = (g(t + h) - g(t - h)) / (2 * h)
    g2 = (g(t + h) - 2 * g(t) + g(t - h)) / h**2
    e_over_d = eigenvalue(ell, d) / d
    st, ct = math.sin(theta), math.cos(theta)
    return (
        g(t),
        st * g1 / math.sqrt(e_over_d),
        g1 / e_over_d,
        (g1 * ct - g2 * st**2) / e_over_d,
    )


class TestMeridianRho:
    def test_against_finite_difference_oracle(self):
        theta, ell, d = 0.3, 10, 3
        rho = meridian_rho(theta, ell, d)
        tt, tg, gg_tan, gg_rad = _rho_fd_oracle(theta, ell, d)
        assert rho.r_tt == pytest.approx(tt, abs=1e-10)
        assert rho.r_tg == pytest.approx(tg, abs=1e-6)
        assert rho.r_gg_tan == pytest.approx(gg_tan, abs=1e-6)
        assert rho.r_gg_rad == pytest.approx(gg_rad, abs=1e-4)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_small_angle_limits(self, d):
        rho = meridian_rho(1e-6, 30, d)
        assert rho.r_tt == pytest.approx(1.0, abs=1e-8)
        assert rho.r_tg == pytest.approx(0.0, abs=1e-4)
        assert rho.r_gg_tan == pytest.approx(1.0, abs=1e-8)
        assert rho.r_gg_rad == pytest.approx(1.0, abs=1e-8)

    def test_entries_bounded_by_one(self):
        for theta in np.linspace(0.05, math.pi / 2, 15):
            rho = meridian_rho(float(theta), 12, 3)
            for v in (rho.r_tt, rho.r_tg, rho.r_gg_tan, rho.r_gg_rad):
                assert abs(v) <= 1.0 + 1e-10


class TestBuildSigma:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("theta", [0.05, 0.4, 1.2, 2.8])
    def test_psd_and_shape(self, theta, d):
        cov = build_sigma(theta, 15, d)
        n = 2 * d + 2
        assert cov.sigma.shape == (n, n)
        assert np.allclose(cov.sigma, cov.sigma.T)
        assert np.linalg.eigvalsh(cov.sigma).min() > -1e-9 * np.trace(cov.sigma)

    def test_unit_diagonal_after_normalization(self):
        corr = normalized_corr(build_sigma(0.7, 10, 3))
        assert np.allclose(np.diag(corr), 1.0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            build_sigma(0.0, 10, 3)
        with pytest.raises(ValueError):
            build_sigma(3.5, 10, 3)
        with pytest.raises(ValueError):
            build_sigma(0.5, 0, 3)


class TestSamplePairs:
    def test_empirical_correlations(self):
        cov = build_sigma(0.6, 8, 3)
        n = 200_000
        t_x, t_y, gx, gy = sample_pairs(cov, n, seed=11)
        tol = 3.0 / math.sqrt(n)
        rho = cov.rho
        assert np.mean(t_x * t_y) == pytest.approx(rho.r_tt, abs=tol)
        # gradients come back in the normalized (unit-variance) convention
        assert np.mean(gx[:, 1] * gy[:, 1]) == pytest.approx(rho.r_gg_tan, abs=tol)
        assert np.var(t_x) == pytest.approx(1.0, abs=2 * tol)

    def test_determinism_and_stream_splitting(self):
        cov = build_sigma(0.6, 8, 2)
        a = sample_pairs(cov, 100, seed=3, task=0)
        b = sample_pairs(cov, 100, seed=3, task=0)
        c = sample_pairs(cov, 100, seed=3, task=1)
        assert np.array_equal(a[0], b[0])
        assert not np.array_equal(a[0], c[0])


class TestGaussianNormMeans:
    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_isotropic_closed_form(self, d):
        # E||N(0, s^2 I_d)|| = s sqrt(2) Gamma((d+1)/2)/Gamma(d/2)
        s = 1.7
        expect = s * math.sqrt(2.0) * math.gamma((d + 1) / 2.0) / math.gamma(d / 2.0)
        assert _gaussian_norm_mean(s**2 * np.eye(d)) == pytest.approx(expect, rel=1e-10)

    def test_pair_product_factorizes_when_independent(self):
        blocks = [np.diag([1.3, 0.4]), np.diag([0.8, 2.1]), np.diag([0.5, 0.9])]
        got = _pair_norm_product_mean(blocks)
        eu = _gaussian_norm_mean(np.diag([1.3, 0.8, 0.5]))
        ev = _gaussian_norm_mean(np.diag([0.4, 2.1, 0.9]))
        assert got == pytest.approx(eu * ev, rel=1e-8)

    def test_pair_product_against_monte_carlo(self):
        block = np.array([[1.0, 0.6], [0.6, 1.5]])
        blocks = [block, np.array([[0.7, -0.3], [-0.3, 0.9]])]
        got = _pair_norm_product_mean(blocks)
        rng = np.random.default_rng(5)
        n = 400_000
        u = np.empty((n, 2))
        v = np.empty((n, 2))
        for i, c in enumerate(blocks):
            chol = np.linalg.cholesky(c)
            z = rng.standard_normal((n, 2)) @ chol.T
            u[:, i], v[:, i] = z[:, 0], z[:, 1]
        vals = np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        assert got == pytest.approx(
            np.mean(vals), abs=3.5 * np.std(vals) / math.sqrt(n)
        )


class TestTwoPointKacRice:
    def test_mc_matches_deterministic(self):
        theta, ell, d = 0.8, 10, 3
        exact = two_point_kacrice_exact(theta, ell, d)
        est = two_point_kacrice(theta, ell, d, n=200_000, seed=2)
        assert est.mean == pytest.approx(exact, abs=3.0 * est.stderr + 1e-12)

    def test_large_angle_decorrelation(self):
        # far apart the correlation approaches the squared one-point intensity
        ell, d = 24, 3
        k = two_point_kacrice_exact(math.pi / 2, ell, d)
        one_pt = mean_nodal_volume(ell, d) / sphere_area(d)
        assert k == pytest.approx(one_pt**2, rel=0.05)

    def test_conditioning_floor(self):
        with pytest.raises(ValueError):
            two_point_kacrice(1e-9, 10, 3, n=1000, seed=0)

    def test_c_constant_identity(self):
        for d in (2, 3, 4):
            ell = 9
            e = eigenvalue(ell, d)
            assert kacrice_c_constant(d) * e * sphere_area(d) ** 2 == pytest.approx(
                mean_nodal_volume(ell, d) ** 2, rel=1e-12
            )
