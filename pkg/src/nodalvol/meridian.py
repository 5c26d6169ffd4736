"""Covariance structure of the field and its gradient at two meridian
points, Gaussian sampling of such pairs, and the two-point Kac-Rice
correlation estimator.

Convention: x is the north pole, y sits on the meridian at geodesic
distance theta > 0.  Gradients are reported in the normalized convention
(divided by sqrt(E/d)), so all correlation entries are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import sphere_area
from .rng import stream
from .specfun import eigenvalue, gegenbauer

PSD_CLIP = -1e-9  # relative to trace; beyond this a negative eigenvalue is an error


@dataclass(frozen=True)
class MeridianRho:
    """Normalized correlation entries of the meridian covariance."""

    r_tt: float  # Corr(T(x), T(y))
    r_tg: float  # Corr(T(y), radial grad at x) = (E/d)^{-1/2} sin(theta) G'
    r_gg_tan: float  # tangential gradient cross-correlation, (E/d)^{-1} G'
    r_gg_rad: float  # radial gradient cross-correlation


@dataclass
class MeridianCov:
    theta: float
    ell: int
    d: int
    sigma: np.ndarray  # (2d+2) x (2d+2), unnormalized gradients
    rho: MeridianRho


@dataclass
class McEstimate:
    mean: float
    stderr: float
    n: int
    seed: int


def meridian_rho(theta: float, ell: int, d: int) -> MeridianRho:
    e_over_d = eigenvalue(ell, d) / d
    g = gegenbauer(ell, d, math.cos(theta))
    st, ct = math.sin(theta), math.cos(theta)
    return MeridianRho(
        r_tt=g.value,
        r_tg=st * g.d1 / math.sqrt(e_over_d),
        r_gg_tan=g.d1 / e_over_d,
        r_gg_rad=(g.d1 * ct - g.d2 * st**2) / e_over_d,
    )


def build_sigma(theta: float, ell: int, d: int) -> MeridianCov:
    """Covariance of (T(x), T(y), grad T(x), grad T(y)) per the sparse block form."""
    if not 0.0 < theta <= math.pi:
        raise ValueError("theta must lie in (0, pi]")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    e_over_d = eigenvalue(ell, d) / d
    g = gegenbauer(ell, d, math.cos(theta))
    st, ct = math.sin(theta), math.cos(theta)
    n = 2 * d + 2
    sigma = np.zeros((n, n))
    sigma[0, 0] = sigma[1, 1] = 1.0
    sigma[0, 1] = sigma[1, 0] = g.value
    b_rad = st * g.d1  # first (radial) component of B(theta); tangential are zero
    # Cov(T(x), grad T(y)) = -B, Cov(T(y), grad T(x)) = +B
    sigma[0, 2 + d] = sigma[2 + d, 0] = -b_rad
    sigma[1, 2] = sigma[2, 1] = b_rad
    for i in range(d):
        sigma[2 + i, 2 + i] = e_over_d
        sigma[2 + d + i, 2 + d + i] = e_over_d
    h_rad = g.d1 * ct - g.d2 * st**2
    sigma[2, 2 + d] = sigma[2 + d, 2] = h_rad
    for i in range(1, d):
        sigma[2 + i, 2 + d + i] = sigma[2 + d + i, 2 + i] = g.d1
    cov = MeridianCov(theta=theta, ell=ell, d=d, sigma=sigma, rho=meridian_rho(theta, ell, d))
    _check_psd(sigma)
    return cov


def normalized_corr(cov: MeridianCov) -> np.ndarray:
    scale = np.sqrt(np.diag(cov.sigma))
    return cov.sigma / np.outer(scale, scale)


def _check_psd(sigma: np.ndarray) -> np.ndarray:
    evals = np.linalg.eigvalsh(sigma)
    floor = PSD_CLIP * np.trace(sigma)
    if evals.min() < floor:
        raise ArithmeticError(
            f"covariance not PSD: min eigenvalue {evals.min():.3e} below {floor:.3e}"
        )
    return evals


def _sqrt_factor(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root with clipping of rounding-level negative eigenvalues."""
    evals, evecs = np.linalg.eigh(mat)
    floor = PSD_CLIP * np.trace(mat)
    if evals.min() < floor:
        raise ArithmeticError(f"eigenvalue {evals.min():.3e} beyond clipping tolerance")
    return evecs * np.sqrt(np.clip(evals, 0.0, None))


def sample_pairs(cov: MeridianCov, n: int, seed: int, task: int = 0):
    """Draw n samples of (T(x), T(y), normalized grads); deterministic per (seed, task).

    Returns arrays t_x, t_y (n,), grad_x, grad_y (n, d).
    """
    d = cov.d
    corr = normalized_corr(cov)
    factor = _sqrt_factor(corr)
    rng = stream(seed, task)
    z = rng.standard_normal((n, 2 * d + 2))
    samples = z @ factor.T
    t_x = samples[:, 0]
    t_y = samples[:, 1]
    grad_x = samples[:, 2 : 2 + d]
    grad_y = samples[:, 2 + d :]
    return t_x, t_y, grad_x, grad_y


def two_point_kacrice(
    theta: float,
    ell: int,
    d: int,
    n: int,
    seed: int,
    theta_min: Optional[float] = None,
) -> McEstimate:
    """Monte Carlo estimate of the two-point correlation function K(theta).

    K = density of (T(x), T(y)) at (0,0) times the conditional mean of
    ||grad T(x)|| ||grad T(y)|| given both field values vanish.  The
    conditional Gaussian comes from the Schur complement of the sparse
    covariance; the MC part uses an independent-coupling control variate
    so the estimate stays sharp where cross-correlations are weak.
    """
    L = ell + (d - 1) / 2.0
    if theta_min is None:
        theta_min = 1e-3 / L
    if theta < theta_min:
        raise ValueError(f"theta {theta} below conditioning floor {theta_min}")
    cov = build_sigma(theta, ell, d)
    sigma = cov.sigma
    g_tt = sigma[:2, :2]
    cross = sigma[2:, :2]  # Cov(grads, T-values)
    grad_block = sigma[2:, 2:]
    det_tt = np.linalg.det(g_tt)
    if det_tt <= 0:
        raise ValueError("degenerate T-block; theta too close to 0 or pi")
    density = 1.0 / (2.0 * math.pi * math.sqrt(det_tt))
    # conditional covariance of (grad x, grad y) given T(x)=T(y)=0 (mean is 0)
    cond = grad_block - cross @ np.linalg.solve(g_tt, cross.T)
    s_x = cond[:d, :d]
    s_y = cond[d:, d:]
    c_xy = cond[:d, d:]
    lx = _sqrt_factor(s_x)
    ly_marg = _sqrt_factor(s_y)
    # coupled construction: v = M u + N z2, with v' = chol-like(s_y) z2 independent of u
    m = c_xy.T @ np.linalg.pinv(s_x)
    resid = s_y - m @ s_x @ m.T
    nfac = _sqrt_factor(resid)
    rng = stream(seed, 0)
    z1 = rng.standard_normal((n, d))
    z2 = rng.standard_normal((n, d))
    u = z1 @ lx.T
    v = u @ m.T + z2 @ nfac.T
    v_ind = z2 @ ly_marg.T
    nu = np.linalg.norm(u, axis=1)
    diff = nu * (np.linalg.norm(v, axis=1) - np.linalg.norm(v_ind, axis=1))
    base = _gaussian_norm_mean(s_x) * _gaussian_norm_mean(s_y)
    vals = density * (diff + base)
    return McEstimate(
        mean=float(np.mean(vals)),
        stderr=float(np.std(vals, ddof=1) / math.sqrt(n)),
        n=n,
        seed=seed,
    )


def _sqrt_mgf_nodes(nodes: int):
    """Quadrature for int_0^inf t^{-3/2} (1 - mgf(t)) dt with the
    substitution t = (x / (1 - x))^2; the transformed integrand is
    smooth on (0, 1) at both ends, so Gauss-Legendre converges fast.
    Returns (t, t^{-3/2} dt weights)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    t = (x / (1.0 - x)) ** 2
    jac = 2.0 * x / (1.0 - x) ** 3
    return t, w * t**-1.5 * jac


def _gaussian_norm_mean(cov: np.ndarray, nodes: int = 120) -> float:
    """E||N(0, cov)|| via E sqrt(A) = (1/(2 sqrt(pi))) int t^{-3/2} (1 - E e^{-tA}) dt."""
    lam = np.clip(np.linalg.eigvalsh(cov), 0.0, None)
    t, w = _sqrt_mgf_nodes(nodes)
    mgf = np.prod(1.0 / np.sqrt(1.0 + 2.0 * np.outer(t, lam)), axis=1)
    return float(np.sum(w * (1.0 - mgf)) / (2.0 * math.sqrt(math.pi)))


def _pair_norm_product_mean(blocks, nodes: int = 80) -> float:
    """E[||u|| ||v||] for jointly Gaussian vectors whose coordinate pairs
    (u_i, v_i) are independent across i with 2x2 covariances `blocks`.

    Uses sqrt(a) sqrt(b) = (1/(4 pi)) int int s^{-3/2} t^{-3/2}
    (1 - e^{-s a})(1 - e^{-t b}) ds dt and the closed-form Laplace
    transform of Gaussian quadratic forms, E exp(-s u_i^2 - t v_i^2)
    = det(I + 2 C_i diag(s, t))^{-1/2}, so the whole expectation is a
    smooth 2-D integral evaluated by tensorized Gauss-Legendre.
    """
    s, ws = _sqrt_mgf_nodes(nodes)
    n = len(s)
    log_joint = np.zeros((n, n))
    log_u = np.zeros(n)
    log_v = np.zeros(n)
    sg, tg = s[:, None], s[None, :]
    for c in blocks:
        # rounding near-degenerate conditioning can leave tiny negative
        # variances or |r| marginally above sqrt(ab); clamp to the PSD cone
        a, b = max(float(c[0][0]), 0.0), max(float(c[1][1]), 0.0)
        r = float(c[0][1])
        cap = math.sqrt(a * b)
        r = max(-cap, min(cap, r))
        log_u += -0.5 * np.log1p(2.0 * a * s)
        log_v += -0.5 * np.log1p(2.0 * b * s)
        det = (1.0 + 2.0 * a * sg) * (1.0 + 2.0 * b * tg) - 4.0 * r * r * sg * tg
        log_joint += -0.5 * np.log(det)
    core = 1.0 - np.exp(log_u)[:, None] - np.exp(log_v)[None, :] + np.exp(log_joint)
    return float(ws @ core @ ws / (4.0 * math.pi))


def _conditional_grad_blocks(cov: MeridianCov):
    """(density, 2x2 blocks) of the gradient pair given T(x) = T(y) = 0.

    Conditioning touches only the radial gradient components, so the
    conditional covariance splits into a radial 2x2 block and d - 1
    identical tangential blocks; the off-block entries vanish by the
    sparsity of the meridian covariance.
    """
    sigma = cov.sigma
    d = cov.d
    g_tt = sigma[:2, :2]
    det_tt = np.linalg.det(g_tt)
    if det_tt <= 0:
        raise ValueError("degenerate T-block; theta too close to 0 or pi")
    density = 1.0 / (2.0 * math.pi * math.sqrt(det_tt))
    cross = sigma[2:, :2]
    cond = sigma[2:, 2:] - cross @ np.linalg.solve(g_tt, cross.T)
    blocks = [np.array([[cond[0, 0], cond[0, d]], [cond[d, 0], cond[d, d]]])]
    for i in range(1, d):
        blocks.append(
            np.array([[cond[i, i], cond[i, d + i]], [cond[d + i, i], cond[d + i, d + i]]])
        )
    return density, blocks


def two_point_kacrice_exact(theta: float, ell: int, d: int, nodes: int = 80) -> float:
    """Deterministic K(theta): zero-set density of (T(x), T(y)) times the
    conditional mean gradient-norm product, by exact 2-D quadrature."""
    density, blocks = _conditional_grad_blocks(build_sigma(theta, ell, d))
    return density * _pair_norm_product_mean(blocks, nodes=nodes)


def kacrice_c_constant(d: int) -> float:
    """c with c * E * H^d(S^d)^2 = E[L]^2, i.e. H^{d-1}(S^{d-1})^2 / (d H^d(S^d)^2)."""
    return sphere_area(d - 1) ** 2 / (d * sphere_area(d) ** 2)
