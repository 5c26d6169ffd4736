"""Exact scalar and polynomial arithmetic used by the identity layer.

Floating point cannot certify a polynomial identity, so all identity
checks run over Fraction coefficients, with the recurring irrational
factors (sqrt(2) and half-integer powers of pi) carried symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple, Union

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class ExactScalar:
    """A number of the form frac * 2**(half2/2) * pi**(halfpi/2).

    half2 is normalised to {0, 1}; integer powers of two are folded into
    frac.  halfpi may be any integer (pi and 1/pi stay symbolic).
    Addition requires matching irrational signature.
    """

    frac: Fraction
    half2: int = 0
    halfpi: int = 0

    @staticmethod
    def of(value: Rational, half2: int = 0, halfpi: int = 0) -> "ExactScalar":
        frac = Fraction(value)
        q, r = divmod(half2, 2)  # fold whole powers of two into frac
        frac *= Fraction(2) ** q
        if frac == 0:
            return ExactScalar(Fraction(0), 0, 0)
        return ExactScalar(frac, r, halfpi)

    def __mul__(self, other: Union["ExactScalar", Rational]) -> "ExactScalar":
        if not isinstance(other, ExactScalar):
            return ExactScalar.of(self.frac * Fraction(other), self.half2, self.halfpi)
        return ExactScalar.of(
            self.frac * other.frac,
            self.half2 + other.half2,
            self.halfpi + other.halfpi,
        )

    __rmul__ = __mul__

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        if self.frac == 0:
            return other
        if other.frac == 0:
            return self
        if (self.half2, self.halfpi) != (other.half2, other.halfpi):
            raise ValueError(
                f"incompatible irrational signatures: {self} + {other}"
            )
        return ExactScalar.of(self.frac + other.frac, self.half2, self.halfpi)

    def __truediv__(self, other: Union["ExactScalar", Rational]) -> "ExactScalar":
        if not isinstance(other, ExactScalar):
            return ExactScalar.of(self.frac / Fraction(other), self.half2, self.halfpi)
        if other.frac == 0:
            raise ZeroDivisionError("division by zero ExactScalar")
        return ExactScalar.of(
            self.frac / other.frac,
            self.half2 - other.half2,
            self.halfpi - other.halfpi,
        )

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.frac, self.half2, self.halfpi)

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        return self + (-other)

    def is_zero(self) -> bool:
        return self.frac == 0

    def to_float(self) -> float:
        return float(self.frac) * math.sqrt(2.0) ** self.half2 * math.pi ** (self.halfpi / 2.0)


def gamma_half(twice: int) -> ExactScalar:
    """Gamma(twice/2) exactly.  twice is twice the argument (integer or half-integer)."""
    if twice % 2 == 0:
        n = twice // 2
        if n <= 0:
            raise ValueError("Gamma pole at non-positive integer")
        return ExactScalar.of(math.factorial(n - 1))
    # half-integer argument m + 1/2 with m = (twice - 1) // 2, possibly negative
    m = (twice - 1) // 2
    if m >= 0:
        # Gamma(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
        return ExactScalar.of(
            Fraction(math.factorial(2 * m), 4**m * math.factorial(m)), 0, 1
        )
    n = -m
    # Gamma(1/2 - n) = (-4)^n n! / (2n)! sqrt(pi)
    return ExactScalar.of(
        Fraction((-4) ** n * math.factorial(n), math.factorial(2 * n)), 0, 1
    )


def binom_frac(top: Fraction, k: int) -> Fraction:
    """Generalised binomial coefficient with rational top argument."""
    num = Fraction(1)
    for j in range(k):
        num *= top - j
    return num / math.factorial(k)


# ---------------------------------------------------------------------------
# Univariate exact polynomials (coefficient lists, lowest degree first)


class PolyQ:
    """Univariate polynomial over Fraction, lowest-degree coefficient first."""

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyQ) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "PolyQ") -> "PolyQ":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return PolyQ([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "PolyQ") -> "PolyQ":
        return self + (other * -1)

    def __mul__(self, other) -> "PolyQ":
        if isinstance(other, PolyQ):
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return PolyQ(out)
        return PolyQ([c * Fraction(other) for c in self.coeffs])

    __rmul__ = __mul__

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + (float(c) if isinstance(t, float) else c)
        return acc

    def compose(self, inner: "PolyQ") -> "PolyQ":
        acc = PolyQ([0])
        for c in reversed(self.coeffs):
            acc = acc * inner + PolyQ([c])
        return acc

    def __repr__(self):
        return f"PolyQ({list(self.coeffs)})"


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials over Fraction


class MPoly:
    """Sparse multivariate polynomial: exponent tuple -> Fraction coefficient."""

    def __init__(self, nvars: int, terms: Dict[Tuple[int, ...], Fraction] = None):
        self.nvars = nvars
        self.terms: Dict[Tuple[int, ...], Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    self.terms[tuple(e)] = c

    @staticmethod
    def const(nvars: int, c) -> "MPoly":
        return MPoly(nvars, {(0,) * nvars: Fraction(c)})

    @staticmethod
    def var(nvars: int, i: int) -> "MPoly":
        e = [0] * nvars
        e[i] = 1
        return MPoly(nvars, {tuple(e): Fraction(1)})

    def __add__(self, other: "MPoly") -> "MPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MPoly(self.nvars, out)

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (other * -1)

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            out: Dict[Tuple[int, ...], Fraction] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
            return MPoly(self.nvars, out)
        return MPoly(self.nvars, {e: c * Fraction(other) for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, MPoly) and self.nvars == other.nvars and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def first_mismatch(self, other: "MPoly"):
        """Return (exponent, coeff_self, coeff_other) of the first differing monomial, or None."""
        keys = sorted(set(self.terms) | set(other.terms))
        for e in keys:
            a = self.terms.get(e, Fraction(0))
            b = other.terms.get(e, Fraction(0))
            if a != b:
                return e, a, b
        return None

    def substitute_univariate(self, values) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(values, e):
                term *= Fraction(x) ** k
            total += term
        return total

    def __repr__(self):
        return f"MPoly({self.nvars}, {self.terms})"


def univariate_from_poly(p: PolyQ, nvars: int, var_index: int) -> MPoly:
    terms = {}
    for k, c in enumerate(p.coeffs):
        e = [0] * nvars
        e[var_index] = k
        terms[tuple(e)] = c
    return MPoly(nvars, terms)
