"""Special-function layer: normalized Gegenbauer with derivatives,
Laguerre/Hermite exact-vs-float agreement, Bessel J against an
independent series oracle, and the scaled-angle prefactor."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import roots_jacobi

from nodalvol.specfun import (
    bessel_j,
    eigenvalue,
    gegenbauer,
    gegenbauer_exact,
    hermite,
    hermite_exact,
    hilb_prefactor,
    laguerre_gen,
    laguerre_gen_exact,
    laguerre_gen_exact_recurrence,
)


class TestGegenbauer:
    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("ell", [0, 1, 2, 5, 13, 30])
    def test_normalization_at_one(self, ell, d):
        assert gegenbauer(ell, d, 1.0).value == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("ell", list(range(1, 31)))
    def test_derivative_at_one_exact(self, ell, d):
        # G'(1) = ell (ell + d - 1) / d, from the eigenvalue equation at t = 1
        _, g1, _ = gegenbauer_exact(ell, d, Fraction(1))
        assert g1 == Fraction(ell * (ell + d - 1), d)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    @pytest.mark.parametrize("ell", [1, 3, 7, 12])
    def test_float_matches_exact_rational(self, ell, d):
        t = Fraction(1, 3)
        g, g1, g2 = gegenbauer_exact(ell, d, t)
        ev = gegenbauer(ell, d, float(t))
        assert ev.value == pytest.approx(float(g), rel=1e-12)
        assert ev.d1 == pytest.approx(float(g1), rel=1e-12)
        assert ev.d2 == pytest.approx(float(g2), rel=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_orthogonality(self, d):
        # weighted integrals against lower degrees vanish; weight (1-t^2)^{d/2-1}
        a = d / 2.0 - 1.0
        nodes, weights = roots_jacobi(40, a, a)
        for ell, m in [(3, 1), (5, 2), (8, 0), (10, 7)]:
            gl = gegenbauer(ell, d, nodes).value
            gm = gegenbauer(m, d, nodes).value
            dot = float(np.sum(weights * gl * gm))
            norm = float(np.sum(weights * gl * gl))
            assert abs(dot) < 1e-12 * max(1.0, norm) or abs(dot) < 1e-13

    @pytest.mark.parametrize("d", [2, 3, 4, 6])
    @pytest.mark.parametrize("ell", [2, 5, 17, 40])
    def test_ode_identity(self, ell, d):
        # (1 - t^2) G'' - d t G' + ell (ell + d - 1) G = 0
        t = np.linspace(-0.95, 0.95, 13)
        g = gegenbauer(ell, d, t)
        resid = (1 - t**2) * g.d2 - d * t * g.d1 + eigenvalue(ell, d) * g.value
        scale = np.max(np.abs(g.d2)) + 1.0
        assert np.max(np.abs(resid)) < 1e-9 * scale

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gegenbauer(3, 1, 0.5)
        with pytest.raises(ValueError):
            gegenbauer(3, 2, 1.5)
        with pytest.raises(ValueError):
            gegenbauer(-1, 2, 0.5)

    def test_degree_one_is_identity(self):
        for d in (2, 3, 4):
            assert gegenbauer(1, d, 0.37).value == pytest.approx(0.37, rel=1e-14)


class TestLaguerre:
    @pytest.mark.parametrize("alpha", [Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(2)])
    @pytest.mark.parametrize("n", range(9))
    def test_closed_form_equals_recurrence(self, n, alpha):
        assert laguerre_gen_exact(n, alpha) == laguerre_gen_exact_recurrence(n, alpha)

    @pytest.mark.parametrize("n", [0, 1, 4, 9])
    def test_float_matches_exact(self, n):
        alpha = Fraction(1, 2)
        poly = laguerre_gen_exact(n, alpha)
        for t in (0.0, 0.7, 3.2):
            assert laguerre_gen(n, float(alpha), t) == pytest.approx(
                poly(t), rel=1e-12, abs=1e-12
            )

    def test_low_orders(self):
        # L_1^{(a)}(t) = 1 + a - t
        assert laguerre_gen(1, 0.5, 0.25) == pytest.approx(1.25)


class TestHermite:
    @pytest.mark.parametrize("q", range(10))
    def test_float_matches_exact(self, q):
        poly = hermite_exact(q)
        for t in (-1.3, 0.0, 0.5, 2.0):
            assert hermite(q, t) == pytest.approx(poly(t), rel=1e-12, abs=1e-12)

    def test_known_values(self):
        assert hermite(2, 1.0) == pytest.approx(0.0)  # t^2 - 1
        assert hermite(3, 2.0) == pytest.approx(2.0)  # t^3 - 3t
        assert hermite_exact(4).coeffs == (3, 0, -6, 0, 1)


def _bessel_series(nu: float, x: float, terms: int = 60) -> float:
    acc = 0.0
    for k in range(terms):
        acc += (-1) ** k * (x / 2.0) ** (2 * k + nu) / (
            math.factorial(k) * math.gamma(k + nu + 1.0)
        )
    return acc


class TestBesselJ:
    @pytest.mark.parametrize("nu", [0.0, 1.0, 0.5, 2.5])
    @pytest.mark.parametrize("x", [0.1, 1.0, 3.7, 8.0])
    def test_against_series_oracle(self, nu, x):
        assert bessel_j(nu, x) == pytest.approx(_bessel_series(nu, x), rel=1e-12, abs=1e-14)

    def test_half_order_closed_forms(self):
        for x in (0.5, 1.7, 6.0):
            assert bessel_j(0.5, x) == pytest.approx(
                math.sqrt(2.0 / (math.pi * x)) * math.sin(x), rel=1e-12
            )

    def test_first_zero_of_j1(self):
        lo, hi = 3.0, 4.5
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if bessel_j(1.0, lo) * bessel_j(1.0, mid) <= 0:
                hi = mid
            else:
                lo = mid
        assert 0.5 * (lo + hi) == pytest.approx(3.8317059702075125, abs=1e-9)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            bessel_j(1.0, -0.5)


class TestHilbPrefactor:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    @pytest.mark.parametrize("ell", [5, 40, 300])
    def test_collapses_to_gamma_form(self, ell, d):
        # the Gamma-ratio assembly equals Gamma(d/2) (2 / (L sin(psi/L)))^{d/2-1}
        L = ell + (d - 1) / 2.0
        nu = d / 2.0 - 1.0
        for psi in (1.0, 5.0, 0.4 * L):
            expect = math.gamma(d / 2.0) * (2.0 / (L * math.sin(psi / L))) ** nu
            assert hilb_prefactor(ell, d, psi).xi == pytest.approx(expect, rel=1e-11)

    def test_d2_is_unity(self):
        assert hilb_prefactor(17, 2, 2.3).xi == pytest.approx(1.0)

    def test_alternate_angle_scale(self):
        xi_l = hilb_prefactor(10, 4, 1.0, angle_scale="L").xi
        xi_ell = hilb_prefactor(10, 4, 1.0, angle_scale="ell").xi
        assert xi_l != xi_ell
        with pytest.raises(ValueError):
            hilb_prefactor(10, 4, 1.0, angle_scale="theta")

    def test_positive_psi_required(self):
        with pytest.raises(ValueError):
            hilb_prefactor(10, 3, 0.0)
