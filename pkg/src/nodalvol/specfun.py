"""Special functions: normalized Gegenbauer polynomials with derivatives,
generalized Laguerre and probabilists' Hermite polynomials, Bessel J, and
the scaled-angle prefactor used in the uniform Gegenbauer asymptotics.

Gegenbauer values are produced by the symmetric-Jacobi three-term
recurrence in t (never trigonometric forms), derivatives by the Jacobi
derivative recurrence; this keeps accuracy uniform on [-1, 1] including
the endpoints.  Everything here is pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np
from scipy.special import gammaln, jv

from .exact import PolyQ, binom_frac

ArrayLike = Union[float, np.ndarray]


@dataclass
class GegenbauerEval:
    ell: int
    d: int
    value: ArrayLike
    d1: ArrayLike
    d2: ArrayLike


@dataclass
class HilbPrefactor:
    ell: int
    d: int
    psi: ArrayLike
    xi: ArrayLike


def eigenvalue(ell: int, d: int) -> float:
    """Laplace eigenvalue ell*(ell + d - 1) on the d-sphere."""
    return float(ell * (ell + d - 1))


def _jacobi_symmetric(n: int, a: float, t):
    """P_n^{(a,a)}(t) by the three-term recurrence, vectorized in t."""
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if n == 0:
        return p_prev
    p = (a + 1.0) * t
    for k in range(1, n):
        # DLMF 18.9.2 specialised to alpha = beta = a (odd term vanishes)
        am = (2 * k + 2 * a + 1) * (2 * k + 2 * a + 2) / (2.0 * (k + 1) * (k + 2 * a + 1))
        cm = (
            (k + a) ** 2
            * (2 * k + 2 * a + 2)
            / ((k + 1) * (k + 2 * a + 1) * (2.0 * k + 2 * a))
        )
        p, p_prev = am * t * p - cm * p_prev, p
    return p


def _jacobi_norm(ell: int, a: float) -> float:
    """binom(ell + a, ell) = P_ell^{(a,a)}(1)."""
    out = 1.0
    for j in range(1, ell + 1):
        out *= (a + j) / j
    return out


def gegenbauer(ell: int, d: int, t) -> GegenbauerEval:
    """Normalized Gegenbauer G_{ell;d} with first two t-derivatives.

    Normalisation G_{ell;d}(1) = 1; the underlying Jacobi parameter is
    a = d/2 - 1.
    """
    if d < 2:
        raise ValueError(f"dimension d must be >= 2, got {d}")
    if ell < 0:
        raise ValueError(f"degree ell must be >= 0, got {ell}")
    tv = np.asarray(t, dtype=float)
    if np.any(tv < -1.0 - 1e-12) or np.any(tv > 1.0 + 1e-12):
        raise ValueError("argument t outside [-1, 1]")
    a = d / 2.0 - 1.0
    norm = _jacobi_norm(ell, a)
    value = _jacobi_symmetric(ell, a, tv) / norm
    # d/dt P_ell^{(a,a)} = ((ell + 2a + 1)/2) P_{ell-1}^{(a+1,a+1)}, iterated
    if ell >= 1:
        c1 = (ell + 2 * a + 1) / 2.0
        d1 = c1 * _jacobi_symmetric(ell - 1, a + 1.0, tv) / norm
    else:
        d1 = np.zeros_like(tv)
    if ell >= 2:
        c2 = (ell + 2 * a + 1) * (ell + 2 * a + 2) / 4.0
        d2 = c2 * _jacobi_symmetric(ell - 2, a + 2.0, tv) / norm
    else:
        d2 = np.zeros_like(tv)
    if np.isscalar(t) or np.ndim(t) == 0:
        value, d1, d2 = float(value), float(d1), float(d2)
    return GegenbauerEval(ell=ell, d=d, value=value, d1=d1, d2=d2)


def gegenbauer_exact(ell: int, d: int, t: Fraction):
    """Exact-rational (G, G', G'') at rational t; small-ell oracle path."""
    a = Fraction(d, 2) - 1
    norm = binom_frac(ell + a, ell)

    def jac(n: int, aa: Fraction, tt: Fraction) -> Fraction:
        p_prev = Fraction(1)
        if n == 0:
            return p_prev
        p = (aa + 1) * tt
        for k in range(1, n):
            am = Fraction((2 * k + 2 * aa + 1) * (2 * k + 2 * aa + 2), 1) / (
                2 * (k + 1) * (k + 2 * aa + 1)
            )
            cm = Fraction((k + aa) ** 2 * (2 * k + 2 * aa + 2), 1) / (
                (k + 1) * (k + 2 * aa + 1) * (2 * k + 2 * aa)
            )
            p, p_prev = am * tt * p - cm * p_prev, p
        return p

    g = jac(ell, a, t) / norm
    g1 = Fraction(0)
    g2 = Fraction(0)
    if ell >= 1:
        g1 = Fraction(ell + 2 * a + 1, 2) * jac(ell - 1, a + 1, t) / norm
    if ell >= 2:
        g2 = (
            Fraction((ell + 2 * a + 1) * (ell + 2 * a + 2), 4)
            * jac(ell - 2, a + 2, t)
            / norm
        )
    return g, g1, g2


def laguerre_gen(n: int, alpha, t):
    """Generalized Laguerre polynomial L_n^{(alpha)}(t) via the recurrence."""
    if n < 0:
        raise ValueError("order n must be >= 0")
    alpha = float(alpha)
    tv = np.asarray(t, dtype=float)
    prev = np.ones_like(tv)
    if n == 0:
        return prev if np.ndim(t) else float(prev)
    cur = 1.0 + alpha - tv
    for k in range(1, n):
        cur, prev = ((2 * k + 1 + alpha - tv) * cur - (k + alpha) * prev) / (k + 1), cur
    return cur if np.ndim(t) else float(cur)


def laguerre_gen_exact(n: int, alpha: Fraction) -> PolyQ:
    """Exact closed form: sum_i (-1)^i binom(n + alpha, n - i) t^i / i!."""
    alpha = Fraction(alpha)
    coeffs = [
        Fraction(-1) ** i * binom_frac(n + alpha, n - i) / math.factorial(i)
        for i in range(n + 1)
    ]
    return PolyQ(coeffs)


def laguerre_gen_exact_recurrence(n: int, alpha: Fraction) -> PolyQ:
    """Exact path via the defining recurrence; must agree with the closed form."""
    alpha = Fraction(alpha)
    prev = PolyQ([1])
    if n == 0:
        return prev
    cur = PolyQ([1 + alpha, -1])
    for k in range(1, n):
        nxt = (PolyQ([2 * k + 1 + alpha, -1]) * cur - (k + alpha) * prev) * Fraction(1, k + 1)
        prev, cur = cur, nxt
    return cur


def hermite(q: int, t):
    """Probabilists' Hermite polynomial H_q(t)."""
    if q < 0:
        raise ValueError("order q must be >= 0")
    tv = np.asarray(t, dtype=float)
    prev = np.ones_like(tv)
    if q == 0:
        return prev if np.ndim(t) else float(prev)
    cur = tv.copy()
    for k in range(1, q):
        cur, prev = tv * cur - k * prev, cur
    return cur if np.ndim(t) else float(cur)


def hermite_exact(q: int) -> PolyQ:
    """Exact coefficients of H_q via H_{k+1} = t H_k - k H_{k-1}."""
    prev = PolyQ([1])
    if q == 0:
        return prev
    cur = PolyQ([0, 1])
    tpoly = PolyQ([0, 1])
    for k in range(1, q):
        cur, prev = tpoly * cur - k * prev, cur
    return cur


def bessel_j(nu: float, x) -> ArrayLike:
    """Bessel function of the first kind J_nu(x), x >= 0.

    Backed by scipy's implementation (series / Hankel asymptotics with
    internal crossover); an independent series oracle lives in the tests.
    """
    xv = np.asarray(x, dtype=float)
    if np.any(xv < 0):
        raise ValueError("bessel_j requires x >= 0")
    out = jv(nu, xv)
    return out if np.ndim(x) else float(out)


def hilb_prefactor(ell: int, d: int, psi, angle_scale: str = "L") -> HilbPrefactor:
    """Prefactor Xi_{ell;d}(psi) of the uniform Bessel-type approximation.

    psi = L * theta with L = ell + (d-1)/2.  Gamma ratios go through
    log-Gamma so large ell cannot overflow.  angle_scale selects the
    argument of the sine power: "L" (default, the internally consistent
    reading) uses sin(psi/L), "ell" uses sin(psi/ell).
    """
    L = ell + (d - 1) / 2.0
    psiv = np.asarray(psi, dtype=float)
    if np.any(psiv <= 0):
        raise ValueError("psi must be positive")
    if angle_scale not in ("L", "ell"):
        raise ValueError("angle_scale must be 'L' or 'ell'")
    denom_scale = L if angle_scale == "L" else float(ell)
    nu = d / 2.0 - 1.0
    # 2^nu / binom(ell+nu, ell) * Gamma(ell + d/2) / (L^nu ell!) collapses to
    # Gamma(d/2) * (2/L)^nu; keep the log-Gamma assembly regardless.
    log_pref = (
        nu * math.log(2.0)
        + gammaln(ell + d / 2.0)
        - (gammaln(ell + d / 2.0) - gammaln(ell + 1.0) - gammaln(d / 2.0))
        - gammaln(ell + 1.0)
        - nu * math.log(L)
    )
    xi = np.exp(log_pref) / np.sin(psiv / denom_scale) ** nu
    if np.ndim(psi) == 0:
        xi = float(xi)
    return HilbPrefactor(ell=ell, d=d, psi=psi, xi=xi)
