"""Short-time survival and exit probabilities with closed-form inversion.

Every target contributes an exit term of the form c * t^p * exp(-a/t)
with a = delta^2 / (4 D) and a dimension-specific amplitude c and power
p (1D: 1/2, 2D: 1, 3D: -1/2). The total exit probability is the sum of
the per-target terms; the survival probability is its complement,
clamped to [0, 1].

Inversion of the exit probability uses the Lambert W closed forms for a
single target and falls back to bracketed root finding on the summed
terms for several targets. In 3D the asymptotic exit probability peaks
at t = delta^2 / (2 D); inversion is restricted to the increasing
branch, which coincides with the domain of the W_-1 branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ValidityError
from .geometry import Geometry
from .lambertw import lambert_w0, lambert_wm1
from .numerics import find_root, grow_bracket, integrate

_SQRT_PI = math.sqrt(math.pi)
_SQRT2 = math.sqrt(2.0)


@lru_cache(maxsize=256)
def _coefficients(g: Geometry) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-target amplitudes c_i, exponents a_i, and the common power p."""
    d = g.diffusion
    amps = []
    args = []
    for t in g.targets:
        if g.dim == 1:
            amps.append(math.sqrt(4.0 * d) / (t.delta * _SQRT_PI))
        elif g.dim == 2:
            amps.append(_SQRT2 * math.pi * d / (2.0 * math.log(1.0 / t.size) * t.delta ** 2))
        else:
            amps.append(t.size ** 2 / (t.delta * math.sqrt(math.pi * d)))
        args.append(t.delta ** 2 / (4.0 * d))
    power = {1: 0.5, 2: 1.0, 3: -0.5}[g.dim]
    return np.array(amps), np.array(args), power


def exit_terms(g: Geometry, t):
    """Per-target exit probabilities F_i(t); shape (M,) + shape(t)."""
    c, a, p = _coefficients(g)
    tt = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c.reshape((-1,) + (1,) * tt.ndim) * np.where(
            tt > 0.0, tt ** p * np.exp(-a.reshape((-1,) + (1,) * tt.ndim) / tt), 0.0)
    return out


def exit_cdf_raw(g: Geometry, t):
    """Unclamped cumulative exit probability, sum of the per-target terms."""
    return exit_terms(g, t).sum(axis=0)


def survival_single(g: Geometry, t):
    """Survival probability of one particle, clamped to [0, 1]."""
    return np.clip(1.0 - exit_cdf_raw(g, t), 0.0, 1.0)


def survival_flagged(g: Geometry, t) -> tuple[float, bool]:
    """Clamped survival plus a flag, False when clamping was needed."""
    raw = 1.0 - exit_cdf_raw(g, t)
    return float(np.clip(raw, 0.0, 1.0)), bool(np.all(raw >= 0.0))


def exit_cdf(g: Geometry, t):
    """F(t) = 1 - survival_single(g, t), clamped to [0, 1].

    Computed from the raw term sum rather than via 1 - S so that tiny
    exit probabilities keep full relative precision; the complement
    identity survival + exit == 1 still holds bit-exactly.
    """
    return np.clip(exit_cdf_raw(g, t), 0.0, 1.0)


def exit_pdf(g: Geometry, t):
    """First-passage density f(t) = dF/dt of the summed asymptotic terms."""
    c, a, p = _coefficients(g)
    tt = np.asarray(t, dtype=float)
    shape = (-1,) + (1,) * tt.ndim
    a_ = a.reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = c.reshape(shape) * np.where(
            tt > 0.0, tt ** p * np.exp(-a_ / tt) * (p / tt + a_ / tt ** 2), 0.0)
    return terms.sum(axis=0)


def fastest_survival(g: Geometry, n: int, t):
    """Survival of the minimum of n independent arrivals, exp(-n F(t))."""
    if n < 1:
        raise DomainError(f"particle count must be >= 1, got {n}")
    return np.exp(-float(n) * exit_cdf(g, t))


def monotone_cap(g: Geometry) -> float:
    """Largest time up to which the exit probability is surely increasing."""
    if g.dim != 3:
        return math.inf
    return min(t.delta ** 2 / (2.0 * g.diffusion) for t in g.targets)


def exit_ceiling(g: Geometry) -> float:
    """Supremum of the exit probability on the monotone branch."""
    cap = monotone_cap(g)
    if math.isinf(cap):
        return math.inf
    return float(exit_cdf_raw(g, cap))


def effective_f_max(g: Geometry, f_max: float) -> float:
    """Trust-region bound for F, also capped by the 3D turning point."""
    return min(f_max, exit_ceiling(g))


def time_horizon(g: Geometry, f_max: float = 0.5) -> float:
    """Time at which the exit probability reaches its trusted maximum."""
    cap = effective_f_max(g, f_max)
    t_mono = monotone_cap(g)
    if not math.isinf(t_mono) and exit_cdf_raw(g, t_mono) <= cap:
        return t_mono
    tau = g.tau_d

    def h(t: float) -> float:
        return float(exit_cdf_raw(g, t)) - cap

    lo = tau
    while h(lo) >= 0.0:
        lo /= 4.0
    hi = min(lo * 2.0, t_mono)
    if h(hi) < 0.0:
        if math.isinf(t_mono):
            lo, hi = grow_bracket(h, lo, hi)
        else:
            hi = t_mono
    return find_root(h, lo, hi, rel_tol=1e-13, f_tol=1e-14 * cap)


def invert_exit_cdf(g: Geometry, target_f: float, *, f_max: float = 0.5) -> float:
    """Time t with F(t) = target_f on the increasing branch.

    Single-target geometries use the Lambert W closed forms; multiple
    targets fall back to bracketed root finding on the summed terms.
    Raises ValidityError when target_f exceeds the trust region or the
    3D branch-point bound.
    """
    if not target_f > 0.0:
        raise DomainError(f"target exit probability must be positive, got {target_f}")
    cap = effective_f_max(g, f_max)
    if target_f > cap * (1.0 + 1e-12):
        raise ValidityError(
            f"exit probability {target_f} beyond trusted maximum {cap}",
            f_value=target_f)
    if len(g.targets) > 1:
        return _invert_numeric(g, target_f, f_max)
    t0 = g.targets[0]
    d = g.diffusion
    if g.dim == 1:
        if target_f < 1e-150:
            raise DomainError("exit probability too small for float inversion")
        return t0.delta ** 2 / (2.0 * d * lambert_w0(2.0 / (math.pi * target_f ** 2)))
    if g.dim == 2:
        arg = _SQRT2 * math.pi / (8.0 * math.log(1.0 / t0.size) * target_f)
        return t0.delta ** 2 / (4.0 * d * lambert_w0(arg))
    arg = -math.pi * t0.delta ** 4 * target_f ** 2 / (2.0 * t0.size ** 4)
    try:
        w = lambert_wm1(arg)
    except DomainError as exc:
        raise ValidityError(
            f"exit probability {target_f} beyond the 3D inversion domain",
            f_value=target_f) from exc
    return -t0.delta ** 2 / (2.0 * d * w)


def _invert_numeric(g: Geometry, target_f: float, f_max: float) -> float:
    hi = time_horizon(g, f_max)
    log_f = math.log(target_f)

    def h(u: float) -> float:
        return math.log(float(exit_cdf_raw(g, math.exp(u)))) - log_f

    u_hi = math.log(hi)
    if h(u_hi) <= 0.0:
        return hi
    u_lo = u_hi
    step = 0.5
    while True:
        u_lo -= step
        val = float(exit_cdf_raw(g, math.exp(u_lo)))
        if val == 0.0:
            u_lo += step
            step /= 2.0
            continue
        if math.log(val) < log_f:
            break
        step *= 2.0
    return math.exp(find_root(h, u_lo, u_hi, rel_tol=1e-15, abs_tol=1e-15,
                              f_tol=1e-12))


@dataclass(frozen=True)
class MfatEstimate:
    """Numerical mean fastest arrival time and its leading-order scale."""

    value: float
    leading_order: float
    decayed: bool
    quad_error: float


def mfat_instantaneous(g: Geometry, n: int, *, f_max: float = 0.5) -> MfatEstimate:
    """Mean fastest arrival time by quadrature of exp(-n F) over the window.

    Also reports tau_d / log(n), the leading-order estimate, and warns
    (decayed=False) when the integrand has not fallen below 1e-12 by
    the end of the validity window.
    """
    if n < 2:
        raise DomainError(f"need at least two particles, got {n}")
    horizon = time_horizon(g, f_max)

    def integrand(t):
        return fastest_survival(g, n, t)

    res = integrate(integrand, 0.0, horizon, abs_tol=1e-14, rel_tol=1e-10,
                    points=[g.tau_d] if g.tau_d < horizon else ())
    decayed = float(integrand(np.array([horizon]))[0]) < 1e-12
    return MfatEstimate(res.value, g.tau_d / math.log(n), decayed, res.error)
