"""Densities of ordered arrival times among n independent particles."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .geometry import Geometry
from .numerics import integrate
from .survival import exit_cdf, exit_pdf, survival_single, time_horizon


def _log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def order_statistic_density(g: Geometry, n: int, k: int, t):
    """Density of the k-th smallest of n i.i.d. arrival times.

    k * C(n, k) * F^(k-1) * (1-F)^(n-k) * f, evaluated through
    log-gamma so counts up to 1e9 stay finite.
    """
    if not 1 <= k <= n:
        raise DomainError(f"rank must satisfy 1 <= k <= n, got k={k}, n={n}")
    tt = np.asarray(t, dtype=float)
    f_cdf = np.asarray(exit_cdf(g, tt), dtype=float)
    s = np.asarray(survival_single(g, tt), dtype=float)
    dens = np.asarray(exit_pdf(g, tt), dtype=float)
    valid = dens > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = math.log(k) + _log_binomial(n, k) + np.log(dens)
        if k > 1:
            logpdf = logpdf + (k - 1) * np.log(f_cdf)
            valid = valid & (f_cdf > 0.0)
        if k < n:
            logpdf = logpdf + (n - k) * np.log(s)
            valid = valid & (s > 0.0)
        out = np.where(valid, np.exp(np.where(valid, logpdf, 0.0)), 0.0)
    return out if out.ndim else float(out)


def joint_density_consecutive(g: Geometry, n: int, k: int, s, t):
    """Joint density of the k-th and (k+1)-th arrivals at times (s, t).

    k (n-k) C(n,k) f(s) f(t) F(s)^(k-1) S(t)^(n-k-1) for s <= t, else 0.
    """
    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n, got k={k}, n={n}")
    ss = np.asarray(s, dtype=float)
    tt = np.asarray(t, dtype=float)
    f_s = np.asarray(exit_cdf(g, ss), dtype=float)
    surv_t = np.asarray(survival_single(g, tt), dtype=float)
    dens = np.asarray(exit_pdf(g, ss), dtype=float) * np.asarray(exit_pdf(g, tt), dtype=float)
    pref = math.exp(math.log(k) + math.log(n - k) + _log_binomial(n, k))
    with np.errstate(divide="ignore", invalid="ignore"):
        fpow = np.where(f_s > 0.0, f_s ** (k - 1), 1.0 if k == 1 else 0.0)
        spow = np.where(surv_t > 0.0, surv_t ** (n - k - 1), 1.0 if k + 1 == n else 0.0)
    out = np.where(ss <= tt, pref * dens * fpow * spow, 0.0)
    return out if out.ndim else float(out)


def order_statistic_mean(g: Geometry, n: int, k: int, *, f_max: float = 0.5) -> float:
    """Mean of the k-th arrival by quadrature over the validity window.

    The density is renormalized by the mass captured inside the window,
    which is all of it except a binomial tail when k << n f_max.
    """
    horizon = time_horizon(g, f_max)

    def mass(t):
        return order_statistic_density(g, n, k, t)

    def weighted(t):
        return t * order_statistic_density(g, n, k, t)

    m = integrate(mass, 0.0, horizon, abs_tol=1e-13, rel_tol=1e-11)
    w = integrate(weighted, 0.0, horizon, abs_tol=1e-14, rel_tol=1e-11)
    if m.value <= 0.0:
        raise DomainError("order-statistic density carries no mass in the window")
    return w.value / m.value
