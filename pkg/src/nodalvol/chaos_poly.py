"""Exact construction of the chaos-expansion coefficients and of the
bivariate polynomial that carries each even chaotic component of the
nodal volume.

Everything in this module runs in exact arithmetic: rationals with the
recurring factors sqrt(2) and half-integer powers of pi kept symbolic.
The reduced coefficient forms are cross-checked against brute-force
expansions of their defining sums, and the bivariate polynomial is built
along three independent routes that must agree monomial by monomial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .exact import ExactScalar, MPoly, PolyQ, gamma_half, univariate_from_poly
from .geometry import sphere_area, sphere_area_ratio_exact
from .specfun import hermite_exact, laguerre_gen_exact, laguerre_gen_exact_recurrence


class IdentityViolation(Exception):
    """An exact identity failed; carries the offending monomial."""


@dataclass(frozen=True)
class AlphaCoeff:
    s: Tuple[int, ...]
    reduced: ExactScalar  # alpha_{2s} / ((2s_1)! ... (2s_d)!)

    @property
    def alpha(self) -> ExactScalar:
        fact = 1
        for si in self.s:
            fact *= math.factorial(2 * si)
        return self.reduced * fact


@dataclass(frozen=True)
class CdpConstant:
    d: int
    p: int
    value: ExactScalar


@dataclass
class IdentityCertificate:
    name: str
    params: dict
    ok: bool
    term_counts: dict = field(default_factory=dict)
    detail: Optional[str] = None


@dataclass
class BivariateChaosPoly:
    """p_{2q}(r, t) with exact coefficients on the monomial basis r^{2i} t^{2j}."""

    q: int
    d: int
    terms: Dict[Tuple[int, int], ExactScalar]
    laguerre_term_count: int
    raw_term_count: int

    def __call__(self, r, t):
        import numpy as np

        r2 = np.asarray(r, dtype=float) ** 2
        t2 = np.asarray(t, dtype=float) ** 2
        acc = 0.0
        for (i, j), c in self.terms.items():
            acc = acc + c.to_float() * r2**i * t2**j
        return acc


def hermite_at_zero(m: int) -> Fraction:
    coeffs = hermite_exact(m).coeffs
    return coeffs[0] if coeffs else Fraction(0)


def beta_coeff(m: int) -> ExactScalar:
    """beta_m = H_m(0) / sqrt(2 pi) (nodal threshold)."""
    return ExactScalar.of(hermite_at_zero(m), -1, -1)


def beta_coeff_level(m: int, u: float) -> float:
    """beta_m(u) = e^{-u^2/2} H_m(u) / sqrt(2 pi)."""
    from .specfun import hermite

    return math.exp(-(u**2) / 2.0) * hermite(m, u) / math.sqrt(2.0 * math.pi)


def c_constant(d: int, p: int) -> CdpConstant:
    """C(d, p) via the closed Gamma-ratio form, exactly."""
    if d < 2 or p < 0:
        raise ValueError("require d >= 2 and p >= 0")
    value = -(gamma_half(d + 1) * gamma_half(2 * p - 1)) / (
        ExactScalar.of(2, 0, 1) * gamma_half(d + 2 * p)
    )
    return CdpConstant(d=d, p=p, value=value)


def c_constant_series(d: int, p: int) -> ExactScalar:
    """The defining alternating series; terminates at i = p since binom(p, i) = 0 beyond."""
    total = ExactScalar.of(0)
    for i in range(p + 1):
        ratio = gamma_half(d + 2 * i + 1) / gamma_half(d + 2 * i)
        total = total + ExactScalar.of((-1) ** i * math.comb(p, i)) * ratio
    return total


def compositions(total: int, parts: int):
    """All tuples of `parts` non-negative integers summing to `total`, colex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def alpha_coeff(s: Tuple[int, ...]) -> AlphaCoeff:
    """Reduced coefficient alpha_{2s}/prod (2s_i)! = (-1)^p sqrt2 / (2^p prod s_i!) C(d, p)."""
    s = tuple(int(x) for x in s)
    if any(x < 0 for x in s):
        raise ValueError("composition entries must be non-negative")
    d = len(s)
    p = sum(s)
    denom = 2**p
    for si in s:
        denom *= math.factorial(si)
    reduced = ExactScalar.of(Fraction((-1) ** p, denom), 1, 0) * c_constant(d, p).value
    return AlphaCoeff(s=s, reduced=reduced)


def alpha_coeff_direct(s: Tuple[int, ...]) -> ExactScalar:
    """Brute-force evaluation of the defining double sum for alpha_{2s}."""
    s = tuple(int(x) for x in s)
    d = len(s)
    p = sum(s)
    total = ExactScalar.of(0)
    for i in range(p + 1):  # inner constraint j_k <= s_k kills i > p
        gamma_ratio = gamma_half(d + 2 * i + 1) / gamma_half(d + 2 * i)
        outer = ExactScalar.of(Fraction(1, math.factorial(i) * 2**i), 1, 0) * gamma_ratio
        inner = Fraction(0)
        for j in compositions(i, d):
            if any(jk > sk for jk, sk in zip(j, s)):
                continue
            multinom = math.factorial(i)
            for jk in j:
                multinom //= math.factorial(jk)
            rem = sum(sk - jk for sk, jk in zip(s, j))
            num = Fraction((-1) ** rem * multinom, 2**rem)
            for sk, jk in zip(s, j):
                num *= Fraction(math.factorial(2 * sk), math.factorial(sk - jk))
            inner += num
        total = total + outer * inner
    return total


# ---------------------------------------------------------------------------
# Polynomial identities


def hermite_laguerre_relation(n: int) -> IdentityCertificate:
    """H_{2n}(x) = (-1)^n 2^n n! L_n^{(-1/2)}(x^2/2), as exact polynomials in x."""
    lhs = hermite_exact(2 * n)
    lag = laguerre_gen_exact(n, Fraction(-1, 2))
    rhs = ((-1) ** n * 2**n * math.factorial(n)) * lag.compose(PolyQ([0, 0, Fraction(1, 2)]))
    ok = lhs == rhs
    cert = IdentityCertificate(
        name="hermite_laguerre",
        params={"n": n},
        ok=ok,
        term_counts={"lhs_terms": len(lhs.coeffs), "rhs_terms": len(rhs.coeffs)},
    )
    if not ok:
        diff = lhs - rhs
        cert.detail = f"first differing coefficient: {diff.coeffs}"
        raise IdentityViolation(cert.detail)
    return cert


def _mpoly_hermite(d: int, var: int, order: int) -> MPoly:
    return univariate_from_poly(hermite_exact(order), d, var)


def hermite_sum_to_laguerre(p: int, d: int) -> IdentityCertificate:
    """sum over compositions of prod H_{2s_j}(t_j)/prod s_j! against (-2)^p L_p^{(d/2-1)}(|t|^2/2)."""
    lhs = MPoly(d)
    n_comps = 0
    for s in compositions(p, d):
        n_comps += 1
        term = MPoly.const(d, Fraction(1))
        for j, sj in enumerate(s):
            term = term * _mpoly_hermite(d, j, 2 * sj)
        denom = 1
        for sj in s:
            denom *= math.factorial(sj)
        lhs = lhs + term * Fraction(1, denom)

    norm2_half = MPoly(d)
    for j in range(d):
        v = MPoly.var(d, j)
        norm2_half = norm2_half + v * v * Fraction(1, 2)
    lag = laguerre_gen_exact(p, Fraction(d, 2) - 1)
    rhs = MPoly.const(d, Fraction(0))
    power = MPoly.const(d, Fraction(1))
    for c in lag.coeffs:
        rhs = rhs + power * c
        power = power * norm2_half
    rhs = rhs * Fraction((-2) ** p)

    mismatch = lhs.first_mismatch(rhs)
    cert = IdentityCertificate(
        name="hermite_sum_to_laguerre",
        params={"p": p, "d": d},
        ok=mismatch is None,
        term_counts={"compositions": n_comps, "monomials": len(lhs.terms)},
    )
    if mismatch is not None:
        cert.detail = f"monomial {mismatch[0]}: lhs {mismatch[1]} vs rhs {mismatch[2]}"
        raise IdentityViolation(cert.detail)
    return cert


# ---------------------------------------------------------------------------
# The bivariate chaos polynomial p_{2q}


def _poly_in_squared(coeffs: List[Fraction], half: bool) -> List[Fraction]:
    """Coefficients of L(x/2) resp. L(x) viewed against x = r^2: c_i / 2^i if half."""
    out = []
    for i, c in enumerate(coeffs):
        out.append(c / (2**i) if half else c)
    return out


def _p2q_laguerre_route(q: int, d: int) -> Dict[Tuple[int, int], ExactScalar]:
    terms: Dict[Tuple[int, int], ExactScalar] = {}
    for p in range(q + 1):
        scal = (
            beta_coeff(2 * q - 2 * p)
            / math.factorial(2 * q - 2 * p)
            * ExactScalar.of(1, 1, 0)
            * c_constant(d, p).value
            * (2 ** (q - p) * (-1) ** (q - p) * math.factorial(q - p))
        )
        lr = laguerre_gen_exact(q - p, Fraction(-1, 2))
        lt = laguerre_gen_exact(p, Fraction(d, 2) - 1)
        cr = _poly_in_squared(list(lr.coeffs), half=True)
        ct = _poly_in_squared(list(lt.coeffs), half=True)
        for i, a in enumerate(cr):
            for j, b in enumerate(ct):
                prev = terms.get((i, j), ExactScalar.of(0))
                terms[(i, j)] = prev + scal * (a * b)
    return {k: v for k, v in terms.items() if not v.is_zero()}


def _p2q_hermite_laguerre_route(q: int, d: int) -> Dict[Tuple[int, int], ExactScalar]:
    terms: Dict[Tuple[int, int], ExactScalar] = {}
    for p in range(q + 1):
        scal = (
            beta_coeff(2 * q - 2 * p)
            / math.factorial(2 * q - 2 * p)
            * ExactScalar.of(1, 1, 0)
            * c_constant(d, p).value
        )
        h = hermite_exact(2 * q - 2 * p).coeffs  # even polynomial in r
        lt = _poly_in_squared(list(laguerre_gen_exact(p, Fraction(d, 2) - 1).coeffs), half=True)
        for deg, a in enumerate(h):
            if a == 0:
                continue
            assert deg % 2 == 0, "odd Hermite coefficient in even polynomial"
            for j, b in enumerate(lt):
                key = (deg // 2, j)
                prev = terms.get(key, ExactScalar.of(0))
                terms[key] = prev + scal * (a * b)
    return {k: v for k, v in terms.items() if not v.is_zero()}


def _p2q_raw_hermite_route(q: int, d: int):
    """Fully expanded Hermite route: (1+d)-variate polynomial in (r, t_1..t_d).

    Coefficients share one irrational signature; returns (MPoly over
    Fraction, unit ExactScalar, monomial-level term count).
    """
    poly = MPoly(1 + d)
    unit: Optional[ExactScalar] = None
    raw_terms = 0
    for p in range(q + 1):
        beta_fac = beta_coeff(2 * q - 2 * p) / math.factorial(2 * q - 2 * p)
        h_r = univariate_from_poly(hermite_exact(2 * q - 2 * p), 1 + d, 0)
        for s in compositions(p, d):
            denom = 1
            for si in s:
                denom *= math.factorial(2 * si)
            coef = beta_fac * (alpha_coeff_direct(s) / denom)
            prod = h_r
            n_monomials = len(h_r.terms)
            for j, sj in enumerate(s):
                hp = _mpoly_hermite(1 + d, 1 + j, 2 * sj)
                n_monomials *= len(hp.terms)
                prod = prod * hp
            raw_terms += n_monomials
            if coef.is_zero():
                continue
            if unit is None:
                unit = ExactScalar(Fraction(1), coef.half2, coef.halfpi)
            elif (coef.half2, coef.halfpi) != (unit.half2, unit.halfpi):
                raise IdentityViolation("mixed irrational signatures in raw expansion")
            poly = poly + prod * coef.frac
    return poly, unit, raw_terms


def _bivariate_to_multivariate(
    terms: Dict[Tuple[int, int], ExactScalar], d: int
):
    """Expand r^{2i} (t_1^2+...+t_d^2)^j into the (r, t_1..t_d) monomial basis."""
    norm2 = MPoly(1 + d)
    for j in range(d):
        v = MPoly.var(1 + d, 1 + j)
        norm2 = norm2 + v * v
    poly = MPoly(1 + d)
    unit: Optional[ExactScalar] = None
    max_j = max((j for (_, j) in terms), default=0)
    norm_pows = [MPoly.const(1 + d, Fraction(1))]
    for _ in range(max_j):
        norm_pows.append(norm_pows[-1] * norm2)
    for (i, j), c in terms.items():
        if unit is None:
            unit = ExactScalar(Fraction(1), c.half2, c.halfpi)
        elif (c.half2, c.halfpi) != (unit.half2, unit.halfpi):
            raise IdentityViolation("mixed irrational signatures in bivariate form")
        r_mono = MPoly(1 + d, {(2 * i,) + (0,) * d: Fraction(1)})
        poly = poly + r_mono * norm_pows[j] * c.frac
    return poly, unit


def build_p2q(q: int, d: int) -> BivariateChaosPoly:
    """Exact p_{2q}; the three construction routes must agree monomial by monomial."""
    if q < 2:
        raise ValueError("chaotic order parameter q must be >= 2")
    lag = _p2q_laguerre_route(q, d)
    her_lag = _p2q_hermite_laguerre_route(q, d)
    # route (a) vs (b)
    keys = set(lag) | set(her_lag)
    for k in sorted(keys):
        a = lag.get(k, ExactScalar.of(0))
        b = her_lag.get(k, ExactScalar.of(0))
        if not (a - b).is_zero():
            raise IdentityViolation(
                f"p_{{2q}} Laguerre vs Hermite-Laguerre mismatch at r^{2*k[0]} t^{2*k[1]}: {a} vs {b}"
            )
    # route (a) vs (c), in the fully expanded multivariate basis
    raw_poly, raw_unit, raw_count = _p2q_raw_hermite_route(q, d)
    biv_poly, biv_unit = _bivariate_to_multivariate(lag, d)
    if raw_unit is not None and biv_unit is not None:
        if (raw_unit.half2, raw_unit.halfpi) != (biv_unit.half2, biv_unit.halfpi):
            raise IdentityViolation("irrational signature mismatch between routes")
    mismatch = raw_poly.first_mismatch(biv_poly)
    if mismatch is not None:
        raise IdentityViolation(
            f"p_{{2q}} raw Hermite vs Laguerre mismatch at monomial {mismatch[0]}: "
            f"{mismatch[1]} vs {mismatch[2]}"
        )
    # parity guard: only even powers ever appear by construction of the routes
    return BivariateChaosPoly(
        q=q,
        d=d,
        terms=lag,
        laguerre_term_count=2 * (q + 1),
        raw_term_count=raw_count,
    )


def p2q_gaussian_mean(poly: BivariateChaosPoly) -> ExactScalar:
    """E[p_{2q}(Z, |W|)] in exact arithmetic; chaoses of order >= 2 are centered.

    Z standard normal, W standard d-dimensional normal, independent.
    E[Z^{2i}] = (2i-1)!!, E[|W|^{2j}] = prod_{k<j} (d + 2k).
    """
    d = poly.d
    total = ExactScalar.of(0)
    for (i, j), c in poly.terms.items():
        moment = Fraction(1)
        for k in range(1, 2 * i, 2):
            moment *= k
        for k in range(j):
            moment *= d + 2 * k
        total = total + c * moment
    return total


def level_second_chaos_coeff(u: float, ell: int, d: int) -> float:
    """Multiplier of the centered H_2 integral in the second chaos of the u-level volume."""
    if d < 2 or ell < 1:
        raise ValueError("require d >= 2 and ell >= 1")
    e = ell * (ell + d - 1)
    ratio = sphere_area_ratio_exact(d).to_float()  # H^{d-1}(S^{d-1}) / H^d(S^d)
    return math.sqrt(e / d) * ratio * math.exp(-(u**2) / 2.0) * u**2 / 2.0


# ---------------------------------------------------------------------------
# Certificate bundles for the CLI


def verify_identities(qmax: int, dmax: int) -> List[IdentityCertificate]:
    """Run the full exact identity suite up to the given orders."""
    certs: List[IdentityCertificate] = []
    for n in range(min(qmax, 12) + 1):
        certs.append(hermite_laguerre_relation(n))
    for d in range(2, dmax + 1):
        for p in range(qmax + 1):
            closed = c_constant(d, p).value
            series = c_constant_series(d, p)
            ok = (closed - series).is_zero()
            certs.append(
                IdentityCertificate(
                    name="c_constant_series",
                    params={"d": d, "p": p},
                    ok=ok,
                    detail=None if ok else f"closed {closed} vs series {series}",
                )
            )
            if not ok:
                raise IdentityViolation(certs[-1].detail)
        for p in range(qmax + 1):
            certs.append(hermite_sum_to_laguerre(p, d))
            for s in compositions(p, d):
                red = alpha_coeff(s).reduced
                direct = alpha_coeff_direct(s)
                denom = 1
                for si in s:
                    denom *= math.factorial(2 * si)
                ok = (red - direct / denom).is_zero()
                certs.append(
                    IdentityCertificate(
                        name="alpha_reduction", params={"s": list(s)}, ok=ok
                    )
                )
                if not ok:
                    raise IdentityViolation(f"alpha reduction failed at s={s}")
        for q in range(2, qmax + 1):
            poly = build_p2q(q, d)
            certs.append(
                IdentityCertificate(
                    name="p2q_three_way",
                    params={"q": q, "d": d},
                    ok=True,
                    term_counts={
                        "laguerre_terms": poly.laguerre_term_count,
                        "raw_monomials": poly.raw_term_count,
                    },
                )
            )
            mean = p2q_gaussian_mean(poly)
            certs.append(
                IdentityCertificate(
                    name="p2q_centered",
                    params={"q": q, "d": d},
                    ok=mean.is_zero(),
                    detail=None if mean.is_zero() else f"mean {mean}",
                )
            )
            if not mean.is_zero():
                raise IdentityViolation(f"p_{{2q}} not centered: {mean}")
    return certs
