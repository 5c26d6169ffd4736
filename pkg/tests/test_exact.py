"""Exact-arithmetic layer: scalars with a shared irrational signature,
rational polynomials, and half-integer Gamma values."""

import math
from fractions import Fraction

import pytest

from nodalvol.exact import (
    ExactScalar,
    MPoly,
    PolyQ,
    binom_frac,
    gamma_half,
    univariate_from_poly,
)


class TestExactScalar:
    def test_normalization_folds_even_sqrt2_powers(self):
        a = ExactScalar.of(Fraction(3), half2=4)
        assert a.half2 in (0, 1)
        assert a.to_float() == pytest.approx(3.0 * 4.0)

    def test_negative_half_powers(self):
        a = ExactScalar.of(Fraction(1), half2=-2, halfpi=-2)
        assert a.to_float() == pytest.approx(1.0 / (2.0 * math.pi))

    def test_mul_accumulates_signatures(self):
        a = ExactScalar.of(Fraction(2), half2=1, halfpi=1)
        b = ExactScalar.of(Fraction(3), half2=1, halfpi=1)
        c = a * b
        # sqrt(2) * sqrt(2) = 2, sqrt(pi) * sqrt(pi) = pi
        assert c.frac == Fraction(12)
        assert c.half2 == 0 and c.halfpi == 2
        assert c.to_float() == pytest.approx(12.0 * math.pi)

    def test_add_requires_matching_signature(self):
        a = ExactScalar.of(Fraction(1), half2=1)
        b = ExactScalar.of(Fraction(2), half2=1)
        assert (a + b).frac == Fraction(3)
        with pytest.raises(ValueError):
            a + ExactScalar.of(Fraction(1), halfpi=1)

    def test_add_zero_any_signature(self):
        z = ExactScalar.of(0)
        a = ExactScalar.of(Fraction(5), half2=1, halfpi=-1)
        assert (a + z).to_float() == pytest.approx(a.to_float())
        assert (z + a).to_float() == pytest.approx(a.to_float())

    def test_division_and_subtraction(self):
        a = ExactScalar.of(Fraction(6), halfpi=2)
        b = ExactScalar.of(Fraction(2), halfpi=1)
        q = a / b
        assert q.to_float() == pytest.approx(3.0 * math.sqrt(math.pi))
        assert (a - a).is_zero()


class TestGammaHalf:
    @pytest.mark.parametrize("twice", range(1, 16))
    def test_positive_arguments(self, twice):
        assert gamma_half(twice).to_float() == pytest.approx(
            math.gamma(twice / 2.0), rel=1e-14
        )

    @pytest.mark.parametrize("twice", [-1, -3, -5, -7])
    def test_negative_half_integers(self, twice):
        assert gamma_half(twice).to_float() == pytest.approx(
            math.gamma(twice / 2.0), rel=1e-13
        )

    def test_poles_rejected(self):
        with pytest.raises(ValueError):
            gamma_half(0)
        with pytest.raises(ValueError):
            gamma_half(-2)


class TestBinomFrac:
    def test_integer_case(self):
        assert binom_frac(Fraction(7), 3) == Fraction(35)

    def test_fractional_top(self):
        # binom(1/2, 2) = (1/2)(-1/2)/2 = -1/8
        assert binom_frac(Fraction(1, 2), 2) == Fraction(-1, 8)


class TestPolyQ:
    def test_ring_operations(self):
        p = PolyQ([Fraction(1), Fraction(2)])  # 1 + 2t
        q = PolyQ([Fraction(0), Fraction(1)])  # t
        assert (p * q)(Fraction(3)) == Fraction(21)
        assert (p + q)(Fraction(2)) == Fraction(7)
        assert (p - p).degree == -1

    def test_compose(self):
        p = PolyQ([Fraction(0), Fraction(0), Fraction(1)])  # t^2
        inner = PolyQ([Fraction(1), Fraction(1)])  # 1 + t
        assert p.compose(inner)(Fraction(2)) == Fraction(9)


class TestMPoly:
    def test_commutative_product(self):
        x = MPoly.var(2, 0)
        y = MPoly.var(2, 1)
        assert x * y == y * x
        assert ((x + y) * (x - y)) == (x * x - y * y)

    def test_first_mismatch_locates_difference(self):
        x = MPoly.var(2, 0)
        y = MPoly.var(2, 1)
        mism = (x * x).first_mismatch(x * x + y)
        assert mism is not None
        assert mism[0] == (0, 1)

    def test_substitute(self):
        x = MPoly.var(2, 0)
        y = MPoly.var(2, 1)
        p = x * x + y * MPoly.const(2, Fraction(3))
        assert p.substitute_univariate([Fraction(2), Fraction(5)]) == Fraction(19)

    def test_univariate_embedding(self):
        p = PolyQ([Fraction(1), Fraction(1)])
        m = univariate_from_poly(p, 3, 1)
        assert m.substitute_univariate(
            [Fraction(0), Fraction(4), Fraction(0)]
        ) == Fraction(5)
