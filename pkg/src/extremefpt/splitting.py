"""Splitting probability of the fastest arrival between two 1D targets.

Sp(lambda, n) is the probability that the first of n particles exits
through the target at distance a1 rather than a2, with lambda = a1/a2.
The reference value is the integral representation; large-n expansions
cover lambda below and above 1, and a boundary-layer formula resolves
the O(1/log n) transition band around lambda = 1 where the limit
jumps from 1 to 0.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .numerics import find_root, integrate

_SQRT_PI = math.sqrt(math.pi)


def splitting_integral(lam: float, n: float, *, abs_tol: float = 1e-10) -> float:
    """Quadrature of the integral representation of Sp(lambda, n)."""
    if not lam > 0.0:
        raise DomainError(f"distance ratio must be positive, got {lam}")
    if not n >= 1:
        raise DomainError(f"particle count must be >= 1, got {n}")
    inv_l2 = 1.0 / (lam * lam)
    coef = lam * n ** (1.0 - inv_l2)

    def integrand(w):
        w = np.asarray(w, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(-(w + coef * np.where(w > 0.0, w ** inv_l2, 0.0)) / _SQRT_PI)

    # second exponential term reaches O(1) at w_star; seed panels there
    upper = -_SQRT_PI * math.log(1e-18)
    points = []
    if coef > 0.0:
        log_wstar = math.log(_SQRT_PI / coef) / inv_l2
        for shift in (-2.0, 0.0, 2.0, 5.0):
            if abs(log_wstar + shift) < 700.0:
                w = math.exp(log_wstar + shift)
                if 0.0 < w < upper:
                    points.append(w)
    res = integrate(integrand, 0.0, upper, abs_tol=abs_tol * _SQRT_PI,
                    rel_tol=1e-13, points=sorted(set(points)))
    return res.value / _SQRT_PI


def splitting_asymptotic(lam: float, n: float) -> float:
    """Large-n expansion of Sp(lambda, n) with boundary-layer stitching.

    Inside |lambda - 1| <= 1/log(n) the boundary-layer profile
    1 / (1 + n^{2(lambda-1)}) applies; outside, the one-sided
    expansions take over.
    """
    if not lam > 0.0:
        raise DomainError(f"distance ratio must be positive, got {lam}")
    if not n >= 1:
        raise DomainError(f"particle count must be >= 1, got {n}")
    log_n = math.log(n)
    if abs(lam - 1.0) * log_n <= 1.0:
        return 1.0 / (1.0 + n ** (2.0 * (lam - 1.0)))
    if lam < 1.0:
        inv_l2 = 1.0 / (lam * lam)
        return 1.0 - lam * math.gamma(1.0 + inv_l2) * (_SQRT_PI / n) ** (inv_l2 - 1.0)
    l2 = lam * lam
    return lam * math.gamma(l2) * (_SQRT_PI / (n * lam)) ** (l2 - 1.0)


def transition_band_width(n: float, *, lo: float = 0.1, hi: float = 0.9,
                          use_integral: bool = True) -> float:
    """Width of the lambda interval where Sp crosses from `hi` down to `lo`."""
    sp = splitting_integral if use_integral else splitting_asymptotic

    def at(level):
        return find_root(lambda lam: sp(lam, n) - level, 0.2, 5.0,
                         rel_tol=1e-10)

    return at(lo) - at(hi)
