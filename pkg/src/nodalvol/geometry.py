"""Sphere surface measures and small shared helpers."""

from __future__ import annotations

import math

import numpy as np

from .exact import ExactScalar, gamma_half


def sphere_area(d: int) -> float:
    """Surface measure of the unit d-sphere embedded in R^{d+1}."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


def sphere_area_ratio_exact(d: int) -> ExactScalar:
    """H^{d-1}(S^{d-1}) / H^d(S^d) = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))."""
    return gamma_half(d + 1) / (ExactScalar.of(1, 0, 1) * gamma_half(d))


def eigenspace_dim(ell: int, d: int) -> int:
    """Dimension of the ell-th eigenspace on S^d."""
    if ell == 0:
        return 1
    return (2 * ell + d - 1) * math.comb(ell + d - 2, ell - 1) // ell


def mean_nodal_volume(ell: int, d: int) -> float:
    """Closed-form expected nodal volume: sqrt(E/d) * H^{d-1}(S^{d-1})."""
    e = ell * (ell + d - 1)
    return math.sqrt(e / d) * sphere_area(d - 1)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
