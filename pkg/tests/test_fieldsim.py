"""Direct simulation on the 2-sphere: Legendre synthesis identities,
field and gradient moments, contour-based nodal length, and the sampling
check of the one-point expectation."""

import math

import numpy as np
import pytest

from nodalvol.chaos_poly import build_p2q
from nodalvol.fieldsim import (
    SphereField2,
    legendre_row,
    legendre_row_derivative,
    mean_nodal_length_mc,
    nodal_length_s2,
    one_point_mean,
    simulate_field_s2,
)
from nodalvol.geometry import mean_nodal_volume
from nodalvol.specfun import eigenvalue, gegenbauer


class TestLegendreSynthesis:
    @pytest.mark.parametrize("ell", [1, 3, 10, 40])
    def test_addition_theorem(self, ell):
        # the normalization folds the m > 0 doubling into the functions,
        # so the straight sum of squares is 2 ell + 1 pointwise
        thetas = np.linspace(0.1, math.pi - 0.1, 25)
        p = legendre_row(ell, np.arange(ell + 1), thetas)
        assert np.allclose(np.sum(p**2, axis=1), 2.0 * ell + 1.0, rtol=1e-10)

    def test_zonal_matches_gegenbauer(self):
        # m = 0 column is sqrt(2 ell + 1) G_{ell;2}(cos theta)
        ell = 7
        thetas = np.linspace(0.2, 3.0, 9)
        p = legendre_row(ell, np.arange(ell + 1), thetas)
        g = gegenbauer(ell, 2, np.cos(thetas)).value
        assert np.allclose(p[:, 0], math.sqrt(2.0 * ell + 1.0) * g, rtol=1e-10)

    def test_derivative_against_finite_difference(self):
        ell = 6
        thetas = np.linspace(0.3, 2.8, 11)
        h = 1e-6
        p = legendre_row(ell, np.arange(ell + 1), thetas)
        dp = legendre_row_derivative(ell, thetas, p)
        p_hi = legendre_row(ell, np.arange(ell + 1), thetas + h)
        p_lo = legendre_row(ell, np.arange(ell + 1), thetas - h)
        fd = (p_hi - p_lo) / (2.0 * h)
        assert np.allclose(dp, fd, atol=1e-5)


class TestFieldMoments:
    def test_pointwise_variance_across_draws(self):
        ell, n = 5, 600
        vals = np.empty(n)
        for k in range(n):
            f = simulate_field_s2(ell, seed=21, sample=k)
            vals[k] = f.values[f.values.shape[0] // 2, 0]
        assert np.var(vals) == pytest.approx(1.0, abs=4.0 / math.sqrt(n) * math.sqrt(2))

    def test_two_point_covariance(self):
        # covariance at polar angle difference pi/3 equals the degree-5 kernel
        ell, n = 5, 600
        prods = np.empty(n)
        for k in range(n):
            f = simulate_field_s2(ell, seed=22, sample=k)
            i0 = np.searchsorted(f.thetas, math.pi / 6)
            i1 = np.searchsorted(f.thetas, math.pi / 6 + math.pi / 3)
            gap = f.thetas[i1] - f.thetas[i0]
            prods[k] = f.values[i0, 0] * f.values[i1, 0]
            expect = gegenbauer(ell, 2, math.cos(gap)).value
        assert np.mean(prods) == pytest.approx(
            expect, abs=3.5 * np.std(prods) / math.sqrt(n)
        )

    def test_gradient_variance_is_half_eigenvalue(self):
        # each gradient component has variance E/2; ergodic grid average
        f = simulate_field_s2(30, seed=3)
        w = np.sin(f.thetas)[:, None]
        for comp in (f.grad_theta, f.grad_phi):
            avg = float(np.sum(comp**2 * w) / (np.sum(w) * comp.shape[1]))
            assert avg == pytest.approx(eigenvalue(30, 2) / 2.0, rel=0.15)

    def test_determinism(self):
        a = simulate_field_s2(8, seed=5, sample=2)
        b = simulate_field_s2(8, seed=5, sample=2)
        c = simulate_field_s2(8, seed=5, sample=3)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_degree_domain(self):
        with pytest.raises(ValueError):
            simulate_field_s2(0, seed=1)


class TestNodalLength:
    def test_synthetic_small_circle(self):
        # zero set of cos(theta) - 1/2 is the circle theta = pi/3
        base = simulate_field_s2(4, seed=0)
        synthetic = SphereField2(
            ell=4,
            thetas=base.thetas,
            phis=base.phis,
            values=np.broadcast_to(
                np.cos(base.thetas)[:, None] - 0.5,
                (len(base.thetas), len(base.phis)),
            ).copy(),
            grad_theta=base.grad_theta,
            grad_phi=base.grad_phi,
            seed=0,
            sample=0,
        )
        expect = 2.0 * math.pi * math.sin(math.pi / 3)
        assert nodal_length_s2(synthetic) == pytest.approx(expect, rel=1e-3)

    def test_rotation_about_pole_preserves_length(self):
        f = simulate_field_s2(10, seed=9)
        rolled = SphereField2(
            ell=f.ell,
            thetas=f.thetas,
            phis=f.phis,
            values=np.roll(f.values, 17, axis=1),
            grad_theta=f.grad_theta,
            grad_phi=f.grad_phi,
            seed=f.seed,
            sample=f.sample,
        )
        assert nodal_length_s2(rolled) == pytest.approx(nodal_length_s2(f), rel=1e-9)

    def test_grid_refinement_invariance(self):
        ell, seed = 12, 31
        coarse = nodal_length_s2(simulate_field_s2(ell, seed, points_per_wavelength=8))
        fine = nodal_length_s2(simulate_field_s2(ell, seed, points_per_wavelength=16))
        assert abs(fine - coarse) / fine < 0.01

    def test_mean_against_closed_form(self):
        est = mean_nodal_length_mc(10, n=40, seed=13)
        assert est.expected == pytest.approx(mean_nodal_volume(10, 2))
        assert est.mean == pytest.approx(est.expected, abs=3.0 * est.stderr)
        assert est.rel_err < 0.05


class TestOnePointMean:
    @pytest.mark.parametrize("d,ell", [(2, 10), (3, 10), (5, 50)])
    def test_within_three_stderr(self, d, ell):
        est = one_point_mean(d, ell, epsilon=0.05, n=400_000, seed=8)
        assert est.mean == pytest.approx(est.expected, abs=3.0 * est.stderr)

    def test_window_bias_matches_exact_window_expectation(self):
        # the finite window multiplies the target by
        # erf(eps / sqrt(2)) sqrt(2 pi) / (2 eps) = 1 - eps^2/6 + O(eps^4),
        # an O(eps^2) downward bias
        def ratio(eps):
            return math.erf(eps / math.sqrt(2.0)) * math.sqrt(2.0 * math.pi) / (2.0 * eps)

        assert ratio(0.1) < ratio(0.01) < 1.0
        assert ratio(0.1) == pytest.approx(1.0 - 0.01 / 6.0, abs=1e-5)
        n = 4_000_000
        wide = one_point_mean(2, 10, epsilon=0.1, n=n, seed=55)
        assert wide.mean == pytest.approx(
            wide.expected * ratio(0.1), abs=3.0 * wide.stderr
        )
        narrow = one_point_mean(2, 10, epsilon=0.01, n=n, seed=55)
        assert narrow.mean == pytest.approx(narrow.expected, abs=3.0 * narrow.stderr)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            one_point_mean(2, 10, epsilon=0.5, n=200_000, seed=0)
        with pytest.raises(ValueError):
            one_point_mean(2, 10, epsilon=0.05, n=100, seed=0)


class TestChaosProjection:
    def test_leading_component_tracks_length(self):
        # on the 2-sphere at this degree the leading chaotic component
        # carries roughly a third of the variance (the per-order decay is
        # slow), so its projection correlates at about the square root of
        # that share; summing a few more orders should not hurt
        ell, n = 50, 60
        polys = [build_p2q(q, 2) for q in (2, 3, 4, 5, 6)]
        scale = math.sqrt(eigenvalue(ell, 2) / 2.0)
        lengths = np.empty(n)
        lead = np.empty(n)
        partial = np.empty(n)
        for k in range(n):
            f = simulate_field_s2(ell, seed=77, sample=k)
            lengths[k] = nodal_length_s2(f)
            grad_norm = np.hypot(f.grad_theta, f.grad_phi) / scale
            w = np.sin(f.thetas)[:, None]
            terms = [float(np.sum(p(f.values, grad_norm) * w)) for p in polys]
            lead[k] = terms[0]
            partial[k] = sum(terms)
        corr_lead = np.corrcoef(lengths, lead)[0, 1]
        corr_partial = np.corrcoef(lengths, partial)[0, 1]
        assert corr_lead > 0.5
        assert corr_partial > corr_lead - 0.05
