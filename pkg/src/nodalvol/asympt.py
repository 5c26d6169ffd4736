"""Numerical verification of high-frequency asymptotics: oscillatory
main terms for the normalized covariance function and its first two
derivatives at scaled arguments, decay of the scaled fourth-moment
integrals, and the uniform contraction bounds used by the series
remainder estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import loglog_slope
from .specfun import eigenvalue, gegenbauer, hilb_prefactor


@dataclass
class AsymptoticCheck:
    quantity: str
    d: int
    ells: List[int]
    residuals: List[float]  # max scaled residual per ell
    slope: float
    predicted_slope: float
    passed: bool
    two_sided: bool
    slope_tolerance: float = 0.3


def _phase(psi: np.ndarray, d: int) -> np.ndarray:
    return psi - (d / 2.0 - 1.0) * math.pi / 2.0 + math.pi / 4.0


def main_term_g(ell: int, d: int, psi: np.ndarray, angle_scale: str = "L") -> np.ndarray:
    """Leading oscillatory approximation of G(cos(psi/L)), with the
    first phase correction (4 nu^2 - 1) / (8 psi)."""
    L = ell + (d - 1) / 2.0
    psi = np.atleast_1d(psi)
    xi = np.asarray(hilb_prefactor(ell, d, psi, angle_scale=angle_scale).xi)
    w = _phase(psi, d)
    nu = d / 2.0 - 1.0
    amp = np.sqrt(2.0 / (math.pi * ell * np.sin(psi / L)))
    return xi * amp * (np.sin(w) + (4.0 * nu**2 - 1.0) / (8.0 * psi) * np.cos(w))


def main_term_g1(ell: int, d: int, psi: np.ndarray, angle_scale: str = "L") -> np.ndarray:
    """Leading approximation of G'(cos(psi/L)) including the 1/ell
    phase-quadrature correction."""
    L = ell + (d - 1) / 2.0
    psi = np.atleast_1d(psi)
    xi = np.asarray(hilb_prefactor(ell, d, psi, angle_scale=angle_scale).xi)
    w = _phase(psi, d)
    den = ell if angle_scale == "ell" else L
    return (
        math.sqrt(ell)
        / np.sin(psi / L) ** 2.5
        * xi
        * math.sqrt(2.0 / math.pi)
        * (-np.cos(w) * np.sin(psi / den) + (d**2 - 1.0) / (8.0 * ell) * np.sin(w))
    )


def ode_second_derivative(ell: int, d: int, theta: np.ndarray) -> np.ndarray:
    """G'' from the defining differential equation (exact):
    sin^2(theta) G'' = d cos(theta) G' - ell (ell + d - 1) G."""
    g = gegenbauer(ell, d, np.cos(theta))
    return (d * np.cos(theta) * g.d1 - ell * (ell + d - 1) * g.value) / np.sin(theta) ** 2


def display_second_derivative(ell: int, d: int, theta: np.ndarray) -> np.ndarray:
    """The simplified form with the cos(theta) factor dropped; differs
    from the exact relation by d (1 - cos) G' / sin^2, inside the stated
    remainder order."""
    g = gegenbauer(ell, d, np.cos(theta))
    return (d * g.d1 - ell**2 * (1.0 + (d - 1.0) / ell) * g.value) / np.sin(theta) ** 2


def _sqrt_ell_path(ell: int, c_values: Sequence[float]) -> np.ndarray:
    """Evaluation points psi = c sqrt(ell): both remainder contributions
    scale identically there, giving a clean single-exponent fit."""
    return np.array([c * math.sqrt(ell) for c in c_values])


def check_gegenbauer_expansion(
    ell_grid: Sequence[int],
    d: int,
    c_values: Sequence[float] = (3.0, 4.0, 5.5, 7.0),
    angle_scale: str = "L",
) -> List[AsymptoticCheck]:
    """Residuals of the oscillatory main terms along psi = c sqrt(ell).

    Returns one check per quantity.  The G residual is measured relative
    to the slowly varying prefactor; predicted exponents come from
    evaluating the stated remainder orders on the sqrt(ell) path.
    """
    ells = sorted(int(x) for x in ell_grid)
    if len(ells) < 4:
        raise ValueError("need at least 4 ell values")
    res_g: List[float] = []
    res_g1: List[float] = []
    res_g2: List[float] = []
    for ell in ells:
        L = ell + (d - 1) / 2.0
        psi = _sqrt_ell_path(ell, c_values)
        theta = psi / L
        g = gegenbauer(ell, d, np.cos(theta))
        xi = np.asarray(hilb_prefactor(ell, d, psi, angle_scale=angle_scale).xi)
        res_g.append(float(np.max(np.abs(g.value - main_term_g(ell, d, psi, angle_scale)) / xi)))
        res_g1.append(float(np.max(np.abs(g.d1 - main_term_g1(ell, d, psi, angle_scale)))))
        res_g2.append(float(np.max(np.abs(g.d2 - display_second_derivative(ell, d, theta)))))
    checks = []
    # remainder O(psi^{-5/2}) + O(1/(ell sqrt(psi))) -> ell^{-5/4} on the path
    slope_g = loglog_slope(ells, res_g)
    checks.append(
        AsymptoticCheck(
            quantity="covariance",
            d=d,
            ells=ells,
            residuals=res_g,
            slope=slope_g,
            predicted_slope=-1.25,
            passed=abs(slope_g + 1.25) <= 0.3,
            two_sided=True,
        )
    )
    # remainder O(ell / psi^{(d+1)/2}) + O(ell^2 / psi^{(d+5)/2}) -> ell^{(3-d)/4}
    slope_g1 = loglog_slope(ells, res_g1)
    pred_g1 = (3.0 - d) / 4.0
    checks.append(
        AsymptoticCheck(
            quantity="first-derivative",
            d=d,
            ells=ells,
            residuals=res_g1,
            slope=slope_g1,
            predicted_slope=pred_g1,
            passed=slope_g1 <= pred_g1 + 0.3,
            two_sided=False,
        )
    )
    # dropped-cosine correction, bounded by O(ell^3 / psi^{(d+3)/2}) -> ell^{(9-d)/4}
    slope_g2 = loglog_slope(ells, res_g2)
    pred_g2 = (9.0 - d) / 4.0
    checks.append(
        AsymptoticCheck(
            quantity="second-derivative",
            d=d,
            ells=ells,
            residuals=res_g2,
            slope=slope_g2,
            predicted_slope=pred_g2,
            passed=slope_g2 <= pred_g2 + 0.3,
            two_sided=False,
        )
    )
    return checks


def _normalized_quantities(ell: int, d: int, theta: np.ndarray):
    """The four dimensionless correlation entries as arrays over theta."""
    e_over_d = eigenvalue(ell, d) / d
    g = gegenbauer(ell, d, np.cos(theta))
    st, ct = np.sin(theta), np.cos(theta)
    return (
        g.value,
        st * g.d1 / math.sqrt(e_over_d),
        g.d1 / e_over_d,
        (g.d1 * ct - g.d2 * st**2) / e_over_d,
    )


def check_lem4_integral(
    a_partition: Sequence[int],
    d: int,
    ell_grid: Sequence[int],
    c_split: float = 1.0,
    nodes_per_panel: int = 8,
) -> AsymptoticCheck:
    """Decay exponent of the scaled absolute fourth-moment integral.

    For exponents a_1..a_{d+3} summing to 4, evaluates
    (1/L) int_C^{L pi/2} sin^{d-1}(psi/L) prod |entry|^{a_j} dpsi
    by panel quadrature (half-period panels, so the |.| kinks are
    localized) and fits the log-log exponent; passes when it is at most
    -d + 0.3.
    """
    a = [int(x) for x in a_partition]
    if len(a) != d + 3 or any(x < 0 for x in a) or sum(a) != 4:
        raise ValueError("need d + 3 non-negative exponents summing to 4")
    ells = sorted(int(x) for x in ell_grid)
    if len(ells) < 4:
        raise ValueError("need at least 4 ell values")
    # tangential exponents a_1..a_{d-1} all multiply the same quantity
    e_tan = sum(a[: d - 1])
    e_tt = a[d - 1]
    e_tg = a[d] + a[d + 1]
    e_rad = a[d + 2]
    values = []
    gauss = np.polynomial.legendre.leggauss(nodes_per_panel)
    for ell in ells:
        L = ell + (d - 1) / 2.0
        lo = c_split / L
        hi = math.pi / 2.0
        width = math.pi / (2.0 * L)
        edges = np.arange(lo, hi, width)
        edges = np.append(edges, hi)
        x, w = gauss
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        theta = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
        weights = (halves[:, None] * w[None, :]).ravel()
        tt, tg, tan, rad = _normalized_quantities(ell, d, theta)
        integrand = (
            np.abs(tan) ** e_tan
            * np.abs(tt) ** e_tt
            * np.abs(tg) ** e_tg
            * np.abs(rad) ** e_rad
            * np.sin(theta) ** (d - 1)
        )
        values.append(float(np.sum(weights * integrand)))
    slope = loglog_slope(ells, values)
    return AsymptoticCheck(
        quantity=f"scaled-integral-{tuple(a)}",
        d=d,
        ells=ells,
        residuals=values,
        slope=slope,
        predicted_slope=float(-d),
        passed=slope <= -d + 0.3,
        two_sided=False,
    )


@dataclass
class UniformBound:
    d: int
    c: float
    epsilon: float
    ells: List[int]
    max_entry: float  # max over theta >= c / ell and the four quantities
    admissible: bool


def uniform_bound_search(
    d: int,
    ells: Sequence[int],
    c_grid: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    eps_grid: Sequence[float] = (0.01, 0.02, 0.05, 0.1, 0.2),
    points_per_period: int = 32,
) -> List[UniformBound]:
    """Search for (C, eps) with all four normalized correlation entries
    below 1 - eps on [C / ell, pi / 2], for every ell in the grid."""
    ells = sorted(int(x) for x in ells)
    out: List[UniformBound] = []
    for c in c_grid:
        worst = 0.0
        for ell in ells:
            lo = c / ell
            n = max(int(points_per_period * ell), 512)
            theta = np.linspace(lo, math.pi / 2.0, n)
            for arr in _normalized_quantities(ell, d, theta):
                worst = max(worst, float(np.max(np.abs(arr))))
        for eps in eps_grid:
            out.append(
                UniformBound(
                    d=d,
                    c=c,
                    epsilon=eps,
                    ells=list(ells),
                    max_entry=worst,
                    admissible=worst < 1.0 - eps,
                )
            )
    return out
