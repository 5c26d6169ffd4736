"""Joint moments of Hermite polynomials of a correlated Gaussian vector.

Two evaluation paths are kept side by side on purpose: a fully general
edge-multiplicity enumeration (the ground-truth oracle) and the sparse
specialized sum used for the chaos covariance on the meridian.  The two
must agree exactly at small orders; that agreement is what guards the
multinomial bookkeeping of the production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .chaos_poly import beta_coeff, c_constant, compositions
from .meridian import MeridianRho, meridian_rho

MAX_TOTAL_DEGREE = 24

_FACTORIALS = [math.factorial(k) for k in range(130)]


class DiagramBudgetError(Exception):
    """Total Hermite degree beyond the combinatorial budget."""


@dataclass(frozen=True)
class DiagramAssignment:
    k12: int
    k1_d3: int
    k23: int
    k3_d3: int

    def weight(self) -> Fraction:
        return Fraction(
            1,
            _FACTORIALS[self.k12]
            * _FACTORIALS[self.k1_d3]
            * _FACTORIALS[self.k23]
            * _FACTORIALS[self.k3_d3],
        )


def enumerate_A(q: int, p: int, p_prime: int, s1: int, s1_prime: int) -> List[DiagramAssignment]:
    """Feasible edge multiplicities for the sparse meridian diagram.

    The four constraints leave a one-parameter family in k12; the
    consistency requirement p - s1 = p' - s1' encodes s_i = s'_i for i >= 2.
    """
    if not (0 <= p <= q and 0 <= p_prime <= q):
        raise ValueError("require 0 <= p, p' <= q")
    out: List[DiagramAssignment] = []
    if p - s1 != p_prime - s1_prime:
        return out
    r1 = 2 * q - 2 * p
    r2 = 2 * q - 2 * p_prime
    for k12 in range(0, min(r1, r2) + 1):
        k1_d3 = r1 - k12
        k23 = r2 - k12
        k3_d3 = 2 * s1 - k23
        if k3_d3 < 0:
            continue
        if k1_d3 + k3_d3 != 2 * s1_prime:
            continue
        out.append(DiagramAssignment(k12=k12, k1_d3=k1_d3, k23=k23, k3_d3=k3_d3))
    return out


# ---------------------------------------------------------------------------
# General diagram oracle


def hermite_product_moment(degrees: Sequence[int], corr) -> Fraction:
    """E[prod_i H_{q_i}(Z_i)] for a centered Gaussian vector with correlation corr.

    Enumerates symmetric non-negative integer matrices k with zero
    diagonal and row sums equal to the degrees.  Exact when corr entries
    are Fractions; works with floats too (then returns float).
    """
    degrees = [int(x) for x in degrees]
    if any(x < 0 for x in degrees):
        raise ValueError("degrees must be non-negative")
    total = sum(degrees)
    if total > MAX_TOTAL_DEGREE:
        raise DiagramBudgetError(f"total degree {total} exceeds {MAX_TOTAL_DEGREE}")
    if total % 2 == 1:
        return Fraction(0)
    m = len(degrees)
    corr_get = lambda i, j: corr[i][j] if not isinstance(corr, np.ndarray) else corr[i, j]

    prefac = Fraction(1)
    for x in degrees:
        prefac *= _FACTORIALS[x]

    def recurse(i: int, remaining: Tuple[int, ...], acc):
        # assign edges from node i to nodes j > i
        if i == m - 1:
            return acc if remaining[-1] == 0 else 0
        ri = remaining[i]
        later = list(remaining[i + 1 :])

        def assign(j: int, left: int, acc_inner):
            if j == m:
                if left != 0:
                    return 0
                return recurse(i + 1, remaining[: i + 1] + tuple(later), acc_inner)
            total_acc = 0
            cap = min(left, later[j - i - 1])
            for k in range(cap + 1):
                rho = corr_get(i, j)
                if k > 0 and (rho == 0):
                    break
                later[j - i - 1] -= k
                contrib = assign(
                    j + 1,
                    left - k,
                    acc_inner * (rho**k) * Fraction(1, _FACTORIALS[k]),
                )
                later[j - i - 1] += k
                total_acc += contrib
            return total_acc

        return assign(i + 1, ri, acc)

    result = recurse(0, tuple(degrees), Fraction(1))
    return prefac * result


# ---------------------------------------------------------------------------
# Specialized meridian path


@dataclass(frozen=True)
class _IntegrandTerm:
    coef: float
    e_tt: int
    e_tg: int
    e_rad: int
    e_tan: int


@lru_cache(maxsize=None)
def _integrand_terms_exact(q: int, d: int):
    """Exact coefficient table: (e_tt, e_tg, e_rad, e_tan) -> ExactScalar.

    The composition sum over s_2..s_d collapses to a central-binomial
    weight because the tangential correlation enters only through
    rho_tan^{2(p - s1)}.
    """
    from .exact import ExactScalar

    table: Dict[Tuple[int, int, int, int], ExactScalar] = {}
    central_weight = {}
    for m in range(q + 1):
        w = Fraction(0)
        for comp in compositions(m, d - 1):
            # per tangential coordinate: (2s_i)!^2 / s_i!^2 from the prefactor
            # and 1/(2s_i)! from the forced diagram edge -> binom(2s_i, s_i)
            term = Fraction(1)
            for si in comp:
                term *= Fraction(_FACTORIALS[2 * si], _FACTORIALS[si] ** 2)
            w += term
        central_weight[m] = w
    for p in range(q + 1):
        for p_prime in range(q + 1):
            base = (
                beta_coeff(2 * q - 2 * p)
                * beta_coeff(2 * q - 2 * p_prime)
                * ExactScalar.of(Fraction((-1) ** (p + p_prime) * 2, 2 ** (p + p_prime)))
                * c_constant(d, p).value
                * c_constant(d, p_prime).value
            )
            for s1 in range(p + 1):
                m = p - s1
                s1_prime = p_prime - m
                if s1_prime < 0:
                    continue
                comb_fac = Fraction(
                    _FACTORIALS[2 * s1] * _FACTORIALS[2 * s1_prime],
                    _FACTORIALS[s1] * _FACTORIALS[s1_prime],
                )
                coef_ps = base * (comb_fac * central_weight[m])
                for a in enumerate_A(q, p, p_prime, s1, s1_prime):
                    sign = (-1) ** a.k1_d3
                    c = coef_ps * (sign * a.weight())
                    key = (a.k12, a.k1_d3 + a.k23, a.k3_d3, 2 * m)
                    prev = table.get(key)
                    table[key] = c if prev is None else prev + c
    return table


@lru_cache(maxsize=None)
def _integrand_terms(q: int, d: int) -> Tuple[_IntegrandTerm, ...]:
    return tuple(
        _IntegrandTerm(coef=v.to_float(), e_tt=k[0], e_tg=k[1], e_rad=k[2], e_tan=k[3])
        for k, v in _integrand_terms_exact(q, d).items()
        if not v.is_zero()
    )


def chaos_covariance_from_rho(q: int, d: int, rho: MeridianRho):
    """E[p_{2q}(x-point) p_{2q}(y-point)] from normalized correlation entries.

    Accepts scalar or array-valued rho fields (vectorized over theta nodes).
    """
    tt = np.asarray(rho.r_tt, dtype=float)
    tg = np.asarray(rho.r_tg, dtype=float)
    rad = np.asarray(rho.r_gg_rad, dtype=float)
    tan = np.asarray(rho.r_gg_tan, dtype=float)
    acc = np.zeros_like(tt)
    for term in _integrand_terms(q, d):
        acc = acc + term.coef * tt**term.e_tt * tg**term.e_tg * rad**term.e_rad * tan**term.e_tan
    return acc if acc.ndim else float(acc)


def chaos_covariance_from_rho_exact(q: int, d: int, rho_frac: Tuple[Fraction, Fraction, Fraction, Fraction]):
    """Exact-rational specialized path (for cross-validation against the oracle)."""
    from .exact import ExactScalar

    tt, tg, rad, tan = (Fraction(x) for x in rho_frac)
    acc = ExactScalar.of(0)
    for key, coef in _integrand_terms_exact(q, d).items():
        e_tt, e_tg, e_rad, e_tan = key
        acc = acc + coef * (tt**e_tt * tg**e_tg * rad**e_rad * tan**e_tan)
    return acc


def chaos_covariance_integrand(q: int, ell: int, d: int, theta: float) -> float:
    """Specialized diagram sum at meridian distance theta."""
    if q < 2:
        raise ValueError("q must be >= 2")
    return chaos_covariance_from_rho(q, d, meridian_rho(theta, ell, d))


def chaos_covariance_oracle_exact(q: int, d: int, rho_frac: Tuple[Fraction, Fraction, Fraction, Fraction]):
    """General-diagram evaluation of E[p_{2q} p_{2q}] over all raw Hermite pairs.

    Builds the full (2d+2)-coordinate correlation matrix from the four
    normalized entries and sums coefficient products times general
    moments.  Exact; exponential cost, for small (q, d) only.
    """
    from .exact import ExactScalar

    tt, tg, rad, tan = (Fraction(x) for x in rho_frac)
    n = 2 * d + 2
    corr = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        corr[i][i] = Fraction(1)
    corr[0][1] = corr[1][0] = tt
    corr[0][2 + d] = corr[2 + d][0] = -tg
    corr[1][2] = corr[2][1] = tg
    corr[2][2 + d] = corr[2 + d][2] = rad
    for i in range(1, d):
        corr[2 + i][2 + d + i] = corr[2 + d + i][2 + i] = tan

    total = ExactScalar.of(0)
    for p in range(q + 1):
        beta_p = beta_coeff(2 * q - 2 * p) / _FACTORIALS[2 * q - 2 * p]
        for p_prime in range(q + 1):
            beta_pp = beta_coeff(2 * q - 2 * p_prime) / _FACTORIALS[2 * q - 2 * p_prime]
            for s in compositions(p, d):
                alpha_s = _alpha_reduced(s)
                for s_prime in compositions(p_prime, d):
                    alpha_sp = _alpha_reduced(s_prime)
                    degrees = (
                        [2 * q - 2 * p, 2 * q - 2 * p_prime]
                        + [2 * si for si in s]
                        + [2 * si for si in s_prime]
                    )
                    moment = hermite_product_moment(degrees, corr)
                    if moment == 0:
                        continue
                    total = total + beta_p * beta_pp * alpha_s * alpha_sp * moment
    return total


@lru_cache(maxsize=None)
def _alpha_reduced(s: Tuple[int, ...]):
    from .chaos_poly import alpha_coeff

    return alpha_coeff(s).reduced
