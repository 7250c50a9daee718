"""Recursive trajectory-free sampling of the first k arrival times.

The cumulative exit probability advances by exponential increments
log(1/U) / (n - k) and each arrival time comes from inverting the exit
probability, so the cost per replica is O(k) and independent of n.
Target identities are drawn from splitting probabilities (1D, two
targets) or from the per-target exit-term weights (2D/3D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ValidityError
from .geometry import Geometry
from .rng import RngStream
from .splitting import splitting_asymptotic
from .survival import effective_f_max, exit_terms, invert_exit_cdf


@dataclass(frozen=True)
class SamplerState:
    """Running state of the recursion over ordered arrivals."""

    n: int
    k_done: int = 0
    f_cum: float = 0.0
    t_last: float = 0.0


@dataclass(frozen=True)
class ArrivalRecord:
    rank: int
    time: float
    target: int
    killed: bool = False


@dataclass(frozen=True)
class KillingSpec:
    """Exponential killing at rate gamma; gamma = 0 disables killing."""

    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0.0:
            raise DomainError(f"killing rate must be >= 0, got {self.gamma}")


def next_arrival(state: SamplerState, g: Geometry, u: float,
                 *, f_max: float = 0.5) -> tuple[float, SamplerState]:
    """Advance the recursion by one arrival using the uniform draw u.

    F(t_new) = F(t_last) + log(1/u) / (n - k_done); the new time comes
    from inverting the exit probability. Raises ValidityError when the
    updated exit probability leaves the trust region.
    """
    if state.k_done >= state.n:
        raise DomainError("all particles have already arrived")
    if not 0.0 < u <= 1.0:
        raise DomainError(f"uniform draw must lie in (0, 1], got {u}")
    f_new = state.f_cum + math.log(1.0 / u) / (state.n - state.k_done)
    if f_new > effective_f_max(g, f_max):
        raise ValidityError(
            f"cumulative exit probability {f_new:.6g} left the trust region",
            f_value=f_new)
    if f_new == state.f_cum:
        t_new = state.t_last
    else:
        t_new = invert_exit_cdf(g, f_new, f_max=f_max)
        t_new = max(t_new, state.t_last)
    return t_new, replace(state, k_done=state.k_done + 1, f_cum=f_new, t_last=t_new)


def select_target(g: Geometry, t: float, u: float,
                  *, n_remaining: int | None = None) -> int:
    """Pick the exit target for an arrival at time t.

    With two 1D targets and a remaining-particle count, the asymptotic
    splitting probability of the fastest among the survivors decides;
    otherwise targets are weighted by their exit terms at time t.
    """
    m = len(g.targets)
    if m == 1:
        return 0
    if g.dim == 1 and m == 2 and n_remaining is not None and n_remaining >= 1:
        lam = g.targets[0].delta / g.targets[1].delta
        p0 = splitting_asymptotic(lam, n_remaining)
        return 0 if u <= p0 else 1
    weights = np.asarray(exit_terms(g, t), dtype=float).reshape(m)
    total = float(weights.sum())
    if total <= 0.0:  # before any exit term rises, fall back to nearest target
        return int(np.argmin([tg.delta for tg in g.targets]))
    cum = np.cumsum(weights / total)
    return int(np.searchsorted(cum, u, side="left"))


def sample_first_k(g: Geometry, n: int, k: int, rng: RngStream,
                   *, f_max: float = 0.5) -> list[ArrivalRecord]:
    """Sample the first k of n ordered arrival times with target ids.

    Each arrival consumes one uniform for the time and one for the
    target. On a validity breach the error carries the prefix sampled
    so far.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    gen = rng.generator()
    state = SamplerState(n=n)
    records: list[ArrivalRecord] = []
    for rank in range(1, k + 1):
        u_time = 1.0 - gen.random()
        try:
            t, state = next_arrival(state, g, u_time, f_max=f_max)
        except ValidityError as exc:
            exc.partial = records
            raise
        u_target = gen.random()
        target = select_target(g, t, u_target, n_remaining=n - rank + 1)
        records.append(ArrivalRecord(rank=rank, time=t, target=target))
    return records


def sample_first_k_with_killing(g: Geometry, n: int, k: int, kill: KillingSpec,
                                rng: RngStream, *, f_max: float = 0.5,
                                ) -> list[ArrivalRecord]:
    """Sample arrivals under exponential killing.

    Candidate times follow the plain recursion; each candidate draws an
    independent Exp(gamma) lifetime and is accepted only if it arrives
    before dying. Rejected candidates still consume a recursion slot
    (they were real particles) and are returned with killed=True for
    diagnostics. Sampling stops after k acceptances, when the candidate
    budget n is exhausted, or when the recursion leaves the validity
    window; in the last two cases the record list holds fewer than k
    accepted arrivals.

    Every candidate consumes one uniform for the lifetime even when
    gamma = 0, which keeps the stream layout identical across gamma.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    gen = rng.generator()
    state = SamplerState(n=n)
    records: list[ArrivalRecord] = []
    accepted = 0
    while accepted < k and state.k_done < n:
        u_time = 1.0 - gen.random()
        try:
            t, state = next_arrival(state, g, u_time, f_max=f_max)
        except ValidityError:
            break
        u_life = gen.random()
        lifetime = math.inf if kill.gamma == 0.0 else -math.log1p(-u_life) / kill.gamma
        u_target = gen.random()
        target = select_target(g, t, u_target,
                               n_remaining=n - state.k_done + 1)
        if t < lifetime:
            accepted += 1
            records.append(ArrivalRecord(rank=accepted, time=t, target=target))
        else:
            records.append(ArrivalRecord(rank=accepted + 1, time=t, target=target,
                                         killed=True))
    return records
