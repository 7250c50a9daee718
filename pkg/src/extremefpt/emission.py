"""Time-dependent injection: effective survival, sampling, MFAT regimes.

Particles are emitted at rate phi(t) = alpha^2 t exp(-alpha t), a unit
mass profile peaking at 1/alpha. The effective exit probability is the
convolution of the instantaneous exit probability with phi; sampling
the ordered arrivals then requires numerically inverting that
convolution at each recursion step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketError, DomainError, ValidityError
from .geometry import Geometry
from .lambertw import lambert_w0
from .numerics import find_root, integrate, integrate_decaying
from .rng import RngStream
from .sampling import ArrivalRecord, select_target
from .survival import (effective_f_max, exit_cdf_raw, mfat_instantaneous,
                       monotone_cap, time_horizon)

_SQRT_PI = math.sqrt(math.pi)

# classification thresholds on alpha * tau_d * sqrt(n) (slow side) and
# alpha * tau_d / log(n)^2 (fast side); reported in CLI output
SLOW_THRESHOLD = 0.1
FAST_THRESHOLD = 10.0


@dataclass(frozen=True)
class EmissionProfile:
    """Gamma-shaped emission rate alpha^2 t exp(-alpha t)."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"emission rate must be positive, got {self.alpha}")

    def pdf(self, t):
        tt = np.asarray(t, dtype=float)
        return np.where(tt >= 0.0, self.alpha ** 2 * tt * np.exp(-self.alpha * tt), 0.0)


@dataclass(frozen=True)
class RegimeEstimate:
    regime: str
    mfat: float
    validity: str
    numerical: float | None = None


def effective_exit_cdf(g: Geometry, phi: EmissionProfile, t: float,
                       *, abs_tol: float = 1e-10, rel_tol: float = 1e-10) -> float:
    """Convolution integral of F(t - s) with the emission profile.

    Uses the raw (unclamped) exit asymptotics inside the convolution,
    which is what the slow-emission expansions integrate as well. The
    quadrature splits at the profile peak and ahead of the essential
    singularity of F at t - s -> 0.
    """
    if t <= 0.0:
        return 0.0
    a_min = min(tg.delta ** 2 / (4.0 * g.diffusion) for tg in g.targets)

    def integrand(s):
        s = np.asarray(s, dtype=float)
        return exit_cdf_raw(g, t - s) * phi.pdf(s)

    # geometric ladder across the profile peak and tail: when 1/alpha << t
    # a single wide panel would miss the peak entirely (all 15 nodes land
    # where the profile has already died)
    points = [c / phi.alpha for c in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)]
    points += [0.25 * t, 0.5 * t, 0.75 * t,
               t - 0.5 * a_min, t - 2.0 * a_min, t - 8.0 * a_min]
    points = sorted({p for p in points if 0.0 < p < t})
    res = integrate(integrand, 0.0, t, abs_tol=abs_tol, rel_tol=rel_tol,
                    points=points)
    return res.value


def within_emission_window(g: Geometry, t: float, f_max: float = 0.5) -> bool:
    """True when no inner F(t - s) query can leave the validity window."""
    return t <= time_horizon(g, f_max)


class _EffectiveCdfTable:
    """Log-log lookup table of the effective exit CDF for fast inversion."""

    def __init__(self, g: Geometry, phi: EmissionProfile, f_max: float,
                 nodes: int = 1024):
        self.g = g
        self.phi = phi
        self.f_cap = effective_f_max(g, f_max)
        def cdf(t):
            return effective_exit_cdf(g, phi, t, abs_tol=1e-300, rel_tol=1e-10)

        # upper end: F_phi reaches just past the trust bound; in 3D the
        # convolution may stay below it, so stop at the turning point
        t_mono = monotone_cap(g)
        hi = max(g.tau_d, 1.0 / phi.alpha)
        for _ in range(400):
            if cdf(hi) >= self.f_cap * 1.02 or hi >= t_mono:
                break
            hi *= 1.5
        hi = min(hi, t_mono)
        lo = hi
        for _ in range(400):
            lo /= 2.0
            v = cdf(lo)
            if v < 1e-21 or v == 0.0:
                break
        grid_t = np.exp(np.linspace(math.log(lo), math.log(hi), nodes))
        grid_f = np.array([cdf(t) for t in grid_t])
        keep = grid_f > 0.0
        self.log_t = np.log(grid_t[keep])
        self.log_f = np.log(grid_f[keep])
        self.t = grid_t[keep]
        self.f = grid_f[keep]
        self.slopes = np.diff(self.log_f) / np.diff(self.log_t)

    def cdf(self, t: float) -> float:
        return effective_exit_cdf(self.g, self.phi, t, abs_tol=1e-300,
                                  rel_tol=1e-10)

    def _slope_at(self, t: float) -> float:
        i = int(np.clip(np.searchsorted(self.log_t, math.log(t)) - 1,
                        0, self.slopes.size - 1))
        return float(self.slopes[i])

    def invert(self, target: float, t_floor: float, *, rel_tol: float = 1e-9,
               ) -> float:
        """Solve F_phi(t) = target for t >= t_floor to `rel_tol` relative.

        Quasi-Newton in log space seeded from the table, with the local
        table slope as the Jacobian; falls back to bracketed bisection
        with secant refinement when the iteration wanders.
        """
        if target > self.f[-1]:
            raise BracketError(
                f"effective exit probability {target:.6g} above tabulated range",
                target=target)
        if target < self.f[0]:
            hi = self.t[0]
            lo = hi / 2.0
            for _ in range(2000):
                v = self.cdf(lo)
                if v < target or v == 0.0:
                    break
                hi = lo
                lo /= 2.0
            else:
                raise BracketError("no lower bracket for effective inversion",
                                   target=target)
            root = find_root(lambda t: self.cdf(t) - target, lo, hi,
                             rel_tol=rel_tol * 0.5, f_tol=0.0)
            return float(max(root, t_floor))
        log_target = math.log(target)
        t = math.exp(float(np.interp(log_target, self.log_f, self.log_t)))
        t = max(t, t_floor)
        lo, hi = 0.0, math.inf  # running bracket from visited points
        for _ in range(10):
            val = self.cdf(t)
            if val <= 0.0:
                lo = max(lo, t)
                t = math.sqrt(t * hi) if math.isfinite(hi) else 2.0 * t
                continue
            slope = self._slope_at(t)
            step = (math.log(val) - log_target) / slope
            if abs(step) <= rel_tol:
                break
            if val < target:
                lo = max(lo, t)
            else:
                hi = min(hi, t)
            t_new = t * math.exp(-step)
            if not lo < t_new < hi:  # safeguard: bisect the running bracket
                t_new = math.sqrt(lo * hi) if lo > 0.0 and math.isfinite(hi) \
                    else 0.5 * (lo + min(hi, 2.0 * t))
            t = t_new
        else:
            i = int(np.searchsorted(self.f, target, side="left"))
            b_lo = max(self.t[max(i - 1, 0)], t_floor)
            b_hi = self.t[min(i, self.t.size - 1)]
            if self.cdf(b_lo) - target >= 0.0:
                return float(b_lo)
            t = find_root(lambda u: self.cdf(u) - target, b_lo, b_hi,
                          rel_tol=rel_tol * 0.5, f_tol=0.0)
        return float(max(t, t_floor))


@lru_cache(maxsize=8)
def _table(g: Geometry, phi: EmissionProfile, f_max: float) -> _EffectiveCdfTable:
    return _EffectiveCdfTable(g, phi, f_max)


def sample_first_k_emission(g: Geometry, phi: EmissionProfile, n: int, k: int,
                            rng: RngStream, *, f_max: float = 0.5,
                            ) -> list[ArrivalRecord]:
    """Sample the first k arrivals under time-dependent emission.

    The cumulative level C advances by log(1/U)/(n - k) and each time
    solves F_phi(t) = C by bracketed root refinement; times are
    non-decreasing because F_phi is.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    table = _table(g, phi, f_max)
    gen = rng.generator()
    records: list[ArrivalRecord] = []
    c_cum = 0.0
    t_last = 0.0
    for rank in range(1, k + 1):
        u_time = 1.0 - gen.random()
        increment = math.log(1.0 / u_time) / (n - rank + 1)
        c_new = c_cum + increment
        if c_new > table.f_cap:
            raise ValidityError(
                f"cumulative exit probability {c_new:.6g} left the trust region",
                f_value=c_new, partial=records)
        t = t_last if increment == 0.0 else table.invert(c_new, t_last)
        u_target = gen.random()
        target = select_target(g, t, u_target, n_remaining=n - rank + 1)
        records.append(ArrivalRecord(rank=rank, time=t, target=target))
        c_cum = c_new
        t_last = t
    return records


@dataclass(frozen=True)
class EmissionMfat:
    value: float
    decayed: bool
    quad_error: float


def mfat_emission_numerical(g: Geometry, phi: EmissionProfile, n: int,
                            *, cutoff: float = 1e-12) -> EmissionMfat:
    """Mean fastest arrival time under emission, by nested quadrature.

    Integrates exp(-n F_phi(t)) until the integrand falls below the
    cutoff; this is the reference value for all regime formulas.
    """
    if n < 2:
        raise DomainError(f"need at least two particles, got {n}")

    def integrand(t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([
            math.exp(-n * effective_exit_cdf(g, phi, float(x),
                                             abs_tol=1e-14, rel_tol=1e-8))
            for x in tt])
        return out if np.ndim(t) else out[0]

    # start the cap search at the diffusive scale: the doubling marks then
    # bracket the decay front wherever the MFAT lands between tau_d and
    # the slow-emission scale
    res, decayed = integrate_decaying(integrand, 0.0, 0.5 * g.tau_d,
                                      cutoff=cutoff, abs_tol=1e-13,
                                      rel_tol=1e-7, limit=1024)
    return EmissionMfat(res.value, decayed, res.error)


def _require_point_source_1d(g: Geometry) -> float:
    if g.dim != 1 or len(g.targets) != 1:
        raise DomainError("emission asymptotics assume a 1D single-target source")
    return g.targets[0].delta


@dataclass(frozen=True)
class SlowMfat:
    value: float
    alpha_bar: float
    within_validity: bool


def mfat_slow_asymptotic(g: Geometry, alpha: float, n: int) -> SlowMfat:
    """Closed-form MFAT in the slow-emission regime.

    (9 pi / 250)^(1/5) * y^(2/5) / (D^(1/5) alpha^(4/5) n^(2/5)) * Gamma(2/5),
    valid for alpha well below 1 / (tau_d sqrt(n)). Also reports the
    scaled rate 4 n alpha^2 tau_d^2 / (15 sqrt(pi)).
    """
    y = _require_point_source_1d(g)
    d = g.diffusion
    value = ((9.0 * math.pi / 250.0) ** 0.2 * y ** 0.4
             / (d ** 0.2 * alpha ** 0.8 * n ** 0.4) * math.gamma(0.4))
    alpha_bar = 4.0 * n * alpha ** 2 * g.tau_d ** 2 / (15.0 * _SQRT_PI)
    ok = alpha * g.tau_d * math.sqrt(n) <= 1.0
    return SlowMfat(value, alpha_bar, ok)


@dataclass(frozen=True)
class FastMfat:
    value: float
    within_validity: bool


def mfat_fast_asymptotic(g: Geometry, alpha: float, n: int,
                         *, f_max: float = 0.5) -> FastMfat:
    """Fast-emission MFAT: instantaneous value plus the 2/alpha shift."""
    base = mfat_instantaneous(g, n, f_max=f_max)
    ok = alpha >= 10.0 * math.log(n) ** 2 / g.tau_d
    return FastMfat(base.value + 2.0 / alpha, ok)


def mfat_intermediate_asymptotic(g: Geometry, alpha: float, n: int) -> float:
    """Lambert-W interpolation between the slow and fast regimes."""
    y = _require_point_source_1d(g)
    d = g.diffusion
    arg = 0.4 * (n * alpha ** 2 * y ** 4
                 / (60.0 * d ** 2 * _SQRT_PI * math.log(2.0))) ** 0.4
    return y ** 2 / (10.0 * d) / lambert_w0(arg)


def classify_regime(g: Geometry, alpha: float, n: int,
                    *, include_numerical: bool = True) -> RegimeEstimate:
    """Label the emission regime and return the matching estimate.

    Slow when alpha tau_d sqrt(n) < 0.1, fast when
    alpha tau_d / log(n)^2 > 10, intermediate otherwise.
    """
    tau = g.tau_d
    slow_score = alpha * tau * math.sqrt(n)
    fast_score = alpha * tau / math.log(n) ** 2
    if slow_score < SLOW_THRESHOLD:
        regime = "slow"
        validity = f"alpha*tau_d*sqrt(n) = {slow_score:.3g} < {SLOW_THRESHOLD}"
    elif fast_score > FAST_THRESHOLD:
        regime = "fast"
        validity = f"alpha*tau_d/log(n)^2 = {fast_score:.3g} > {FAST_THRESHOLD}"
    else:
        regime = "intermediate"
        validity = (f"{SLOW_THRESHOLD} <= alpha*tau_d*sqrt(n) = {slow_score:.3g} "
                    f"or alpha*tau_d/log(n)^2 = {fast_score:.3g} <= {FAST_THRESHOLD}")
    try:
        if regime == "slow":
            mfat = mfat_slow_asymptotic(g, alpha, n).value
        elif regime == "fast":
            mfat = mfat_fast_asymptotic(g, alpha, n).value
        else:
            mfat = mfat_intermediate_asymptotic(g, alpha, n)
    except DomainError:  # slow/intermediate forms need a 1D point source
        mfat = math.nan
    numerical = None
    if include_numerical:
        numerical = mfat_emission_numerical(g, EmissionProfile(alpha), n).value
    return RegimeEstimate(regime, mfat, validity, numerical)
