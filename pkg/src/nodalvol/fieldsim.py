"""Direct simulation of random spherical harmonics on the 2-sphere and
measurement of their nodal length by contour extraction, plus a
sampling check of the one-point expectation formula.

The synthesis uses fully normalized associated Legendre functions (the
geodesy convention, where the squares at fixed degree sum to 2 ell + 1
by the addition theorem), so unit field variance needs no per-degree
rescaling beyond 1 / (2 ell + 1) on the coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from skimage import measure

from .geometry import mean_nodal_volume, sphere_area
from .rng import stream
from .specfun import eigenvalue


@dataclass
class SphereField2:
    ell: int
    thetas: np.ndarray  # (n_theta,), colatitudes, pole caps excluded
    phis: np.ndarray  # (n_phi,), longitudes in [0, 2 pi)
    values: np.ndarray  # (n_theta, n_phi)
    grad_theta: np.ndarray  # (n_theta, n_phi), dT/dtheta
    grad_phi: np.ndarray  # (n_theta, n_phi), (1/sin theta) dT/dphi
    seed: int
    sample: int


@dataclass
class NodalLengthEstimate:
    ell: int
    mean: float
    stderr: float
    n: int
    expected: float
    rel_err: float


def legendre_row(ell: int, m_values: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Fully normalized P_{ell, m}(cos theta) for all m, shape (n_theta, ell + 1).

    Upward recurrence in degree from the sectorial seed; stable for the
    moderate degrees used here.
    """
    ct = np.cos(thetas)
    st = np.sin(thetas)
    n_t = len(thetas)
    out = np.zeros((n_t, ell + 1))
    pmm = np.ones(n_t)  # P_{0,0} = 1
    for m in range(ell + 1):
        if m > 0:
            fac = math.sqrt(3.0) if m == 1 else math.sqrt((2.0 * m + 1.0) / (2.0 * m))
            pmm = fac * st * pmm
        if m == ell:
            out[:, m] = pmm
            break
        a_prev = math.sqrt(2.0 * m + 3.0)
        p_prev, p_curr = pmm, a_prev * ct * pmm  # degrees m and m + 1
        if ell == m + 1:
            out[:, m] = p_curr
            continue
        for n in range(m + 2, ell + 1):
            a_n = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            p_prev, p_curr = p_curr, a_n * (ct * p_curr - p_prev / a_prev)
            a_prev = a_n
        out[:, m] = p_curr
    return out


def legendre_row_derivative(
    ell: int, thetas: np.ndarray, p_ell: np.ndarray
) -> np.ndarray:
    """d/dtheta of the fully normalized degree-ell row.

    Uses the same-order lowering relation
    dP_{n,m}/dtheta = n cot(theta) P_{n,m}
                      - sqrt((n^2 - m^2)(2n + 1)/(2n - 1)) P_{n-1,m} / sin(theta).
    """
    ct, st = np.cos(thetas), np.sin(thetas)
    out = p_ell * (ell * ct / st)[:, None]
    if ell >= 1:
        m_low = np.arange(ell)
        p_prev = legendre_row(ell - 1, m_low, thetas)
        fac = np.sqrt((ell**2 - m_low**2) * (2.0 * ell + 1.0) / (2.0 * ell - 1.0))
        out[:, : ell] -= p_prev * fac / st[:, None]
    return out


def simulate_field_s2(
    ell: int,
    seed: int,
    sample: int = 0,
    points_per_wavelength: int = 8,
    pole_cap: Optional[float] = None,
) -> SphereField2:
    """One realization of the degree-ell random harmonic on a lat-lon grid.

    The grid resolves at least points_per_wavelength points per
    oscillation along any great circle; colatitudes within pole_cap of
    either pole are excluded (default 2 grid spacings).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n_phi = max(points_per_wavelength * ell, 64)
    d_phi = 2.0 * math.pi / n_phi
    if pole_cap is None:
        pole_cap = 2.0 * d_phi
    n_theta = max(int(math.ceil((math.pi - 2.0 * pole_cap) / (d_phi / 2.0))), 32)
    thetas = np.linspace(pole_cap, math.pi - pole_cap, n_theta)
    phis = np.arange(n_phi) * d_phi

    rng = stream(seed, sample)
    scale = 1.0 / math.sqrt(2.0 * ell + 1.0)
    a_cos = rng.standard_normal(ell + 1) * scale
    a_sin = rng.standard_normal(ell + 1) * scale

    m_values = np.arange(ell + 1)
    p = legendre_row(ell, m_values, thetas)  # (n_theta, ell + 1)
    dp = legendre_row_derivative(ell, thetas, p)
    cos_m = np.cos(np.outer(m_values, phis))  # (ell + 1, n_phi)
    sin_m = np.sin(np.outer(m_values, phis))
    values = (p * a_cos) @ cos_m + (p * a_sin) @ sin_m
    grad_theta = (dp * a_cos) @ cos_m + (dp * a_sin) @ sin_m
    # (1/sin) d/dphi swaps the azimuthal factors and brings down m
    pm_over_sin = p * m_values / np.sin(thetas)[:, None]
    grad_phi = (pm_over_sin * a_sin) @ cos_m - (pm_over_sin * a_cos) @ sin_m
    return SphereField2(
        ell=ell,
        thetas=thetas,
        phis=phis,
        values=values,
        grad_theta=grad_theta,
        grad_phi=grad_phi,
        seed=seed,
        sample=sample,
    )


def nodal_length_s2(field: SphereField2) -> float:
    """Length of the zero set of the gridded field, by marching squares.

    The longitude seam is closed by appending a wrapped copy of the
    first column; segment lengths use the round metric
    ds^2 = dtheta^2 + sin^2(theta) dphi^2 at the segment midpoint.
    """
    vals = np.hstack([field.values, field.values[:, :1]])
    d_theta = field.thetas[1] - field.thetas[0]
    d_phi = field.phis[1] - field.phis[0]
    total = 0.0
    for contour in measure.find_contours(vals, 0.0):
        theta = field.thetas[0] + contour[:, 0] * d_theta
        phi = contour[:, 1] * d_phi
        dt = np.diff(theta)
        dp = np.diff(phi)
        mid = 0.5 * (theta[:-1] + theta[1:])
        total += float(np.sum(np.sqrt(dt**2 + (np.sin(mid) * dp) ** 2)))
    return total


def mean_nodal_length_mc(
    ell: int, n: int, seed: int, points_per_wavelength: int = 8
) -> NodalLengthEstimate:
    """Monte Carlo mean of the measured nodal length over n realizations."""
    lengths = np.empty(n)
    for k in range(n):
        field = simulate_field_s2(
            ell, seed, sample=k, points_per_wavelength=points_per_wavelength
        )
        lengths[k] = nodal_length_s2(field)
    expected = mean_nodal_volume(ell, 2)
    mean = float(np.mean(lengths))
    return NodalLengthEstimate(
        ell=ell,
        mean=mean,
        stderr=float(np.std(lengths, ddof=1) / math.sqrt(n)),
        n=n,
        expected=expected,
        rel_err=abs(mean - expected) / expected,
    )


def one_point_mean(
    d: int, ell: int, epsilon: float, n: int, seed: int
) -> NodalLengthEstimate:
    """Sampling check of the one-point expectation identity.

    Estimates H^d(S^d) E[(2 eps)^{-1} 1_{|T| <= eps} ||grad T||] from the
    one-point joint law: T standard normal, independent of the gradient
    N(0, (E/d) I_d).  The estimator is biased O(eps^2) relative (the
    Gaussian density is smooth and even at 0), downward in eps.
    """
    if epsilon <= 0 or epsilon > 0.1:
        raise ValueError("epsilon must lie in (0, 0.1]")
    if n < 10**5:
        raise ValueError("n must be at least 1e5")
    rng = stream(seed, 0)
    t = rng.standard_normal(n)
    grads = rng.standard_normal((n, d)) * math.sqrt(eigenvalue(ell, d) / d)
    norms = np.linalg.norm(grads, axis=1)
    window = (np.abs(t) <= epsilon) / (2.0 * epsilon)
    vals = sphere_area(d) * window * norms
    expected = mean_nodal_volume(ell, d)
    mean = float(np.mean(vals))
    return NodalLengthEstimate(
        ell=ell,
        mean=mean,
        stderr=float(np.std(vals, ddof=1) / math.sqrt(n)),
        n=n,
        expected=expected,
        rel_err=abs(mean - expected) / expected,
    )
