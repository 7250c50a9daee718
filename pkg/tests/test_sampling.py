import math

import numpy as np
import pytest

from conftest import chi_square_2d, chi_square_gof, joint_cell_mass, ks_one_sample
from extremefpt.errors import DomainError, ValidityError
from extremefpt.geometry import Geometry
from extremefpt.oracle import ks_statistic
from extremefpt.rng import RngStream
from extremefpt.sampling import (ArrivalRecord, KillingSpec, SamplerState,
                                 next_arrival, sample_first_k,
                                 sample_first_k_with_killing, select_target)
from extremefpt.splitting import splitting_asymptotic
from extremefpt.survival import (exit_cdf, exit_pdf, exit_terms, fastest_survival,
                                 invert_exit_cdf)

LINE = Geometry.line(1.0)


def test_rng_streams_deterministic_and_distinct():
    a = RngStream(5, 3).generator().random(4)
    b = RngStream(5, 3).generator().random(4)
    c = RngStream(5, 4).generator().random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RngStream(5).replica(3) == RngStream(5, 3)


def test_next_arrival_u_one_keeps_time():
    state = SamplerState(n=100)
    t1, state = next_arrival(state, LINE, 0.37)
    t2, state = next_arrival(state, LINE, 1.0)
    assert t2 == t1  # log(1/1) = 0, bit-exact
    t0, _ = next_arrival(SamplerState(n=100), LINE, 1.0)
    assert t0 == 0.0


def test_next_arrival_first_draw_algebra():
    n, x = 1000, 2e-4
    u = math.exp(-n * x)
    t, state = next_arrival(SamplerState(n=n), LINE, u)
    assert t == pytest.approx(invert_exit_cdf(LINE, x), rel=1e-12)
    assert state.k_done == 1 and state.t_last == t


def test_cumulative_exit_replay_is_exact():
    n = 50
    us = [0.9, 0.4, 0.77, 0.123, 0.5]
    state = SamplerState(n=n)
    for u in us:
        _, state = next_arrival(state, LINE, u, f_max=0.9)
    expected = 0.0
    for i, u in enumerate(us):
        expected += math.log(1.0 / u) / (n - i)
    assert state.f_cum == expected


def test_next_arrival_validity_breach():
    state = SamplerState(n=2)
    with pytest.raises(ValidityError) as err:
        next_arrival(state, LINE, 1e-9)  # log(1/u)/2 > 0.5
    assert err.value.f_value > 0.5


def test_sample_first_k_strictly_increasing_over_seeds():
    n, k = 50, 10
    for seed in range(1000):
        try:
            recs = sample_first_k(LINE, n, k, RngStream(seed), f_max=0.5)
        except ValidityError as exc:
            recs = exc.partial
        times = [r.time for r in recs]
        assert all(a < b for a, b in zip(times, times[1:]))
        assert [r.rank for r in recs] == list(range(1, len(recs) + 1))


def test_sample_first_k_deterministic():
    a = sample_first_k(LINE, 1000, 5, RngStream(123, 9))
    b = sample_first_k(LINE, 1000, 5, RngStream(123, 9))
    assert a == b


def test_first_arrival_matches_fastest_law():
    # inverse transform of the fastest-arrival CDF 1 - exp(-n F)
    n, replicas = 1000, 100_000
    times = np.array([sample_first_k(LINE, n, 1, RngStream(2024, r))[0].time
                      for r in range(replicas)])
    d = ks_one_sample(times, lambda t: 1.0 - float(fastest_survival(LINE, n, t)))
    assert d < 0.01


def test_validity_breach_carries_prefix():
    with pytest.raises(ValidityError) as err:
        sample_first_k(LINE, 20, 20, RngStream(4), f_max=0.2)
    partial = err.value.partial
    assert 0 < len(partial) < 20
    times = [r.time for r in partial]
    assert all(a < b for a, b in zip(times, times[1:]))


def test_bounds_checked():
    with pytest.raises(DomainError):
        sample_first_k(LINE, 10, 11, RngStream(0))
    with pytest.raises(DomainError):
        next_arrival(SamplerState(n=5), LINE, 1.5)


def test_select_target_single():
    assert select_target(LINE, 0.05, 0.99) == 0


def test_select_target_equal_split_1d():
    g = Geometry.line([1.0, 1.0])
    gen = RngStream(77).generator()
    draws = 10_000
    hits = sum(select_target(g, 0.05, gen.random(), n_remaining=1000)
               for _ in range(draws))
    assert abs(hits / draws - 0.5) <= 0.01
    assert splitting_asymptotic(1.0, 1000) == 0.5


def test_select_target_1d_prefers_near_target():
    g = Geometry.line([0.8, 1.3])
    gen = RngStream(3).generator()
    p0 = splitting_asymptotic(0.8 / 1.3, 500)
    hits = sum(select_target(g, 0.05, gen.random(), n_remaining=500) == 0
               for _ in range(20_000))
    assert p0 > 0.95
    assert abs(hits / 20_000 - p0) < 0.01


def test_select_target_3d_exit_weight_rule():
    g = Geometry.ball([1.0, 1.3], [0.1, 0.12])
    t = 0.12
    weights = np.asarray(exit_terms(g, t)).ravel()
    p0 = weights[0] / weights.sum()
    gen = RngStream(11).generator()
    draws = 20_000
    hits = sum(select_target(g, t, gen.random()) == 0 for _ in range(draws))
    se = math.sqrt(p0 * (1 - p0) / draws)
    assert abs(hits / draws - p0) < 4 * se


def test_two_target_sampler_records_targets():
    g = Geometry.line([1.0, 1.0])
    recs = sample_first_k(g, 1000, 50, RngStream(6))
    assert {r.target for r in recs} == {0, 1}


# --- killing ---------------------------------------------------------------


def test_killing_gamma_zero_matches_plain_on_shared_streams():
    """With gamma = 0 every candidate is accepted and the time draw is the
    first uniform of each candidate block, so t1 is bit-identical to the
    plain sampler on the same stream; KS over replicas is then zero."""
    n, replicas = 1000, 10_000
    plain = np.empty(replicas)
    killed = np.empty(replicas)
    for r in range(replicas):
        plain[r] = sample_first_k(LINE, n, 1, RngStream(55, r))[0].time
        killed[r] = sample_first_k_with_killing(
            LINE, n, 1, KillingSpec(0.0), RngStream(55, r))[0].time
    assert ks_statistic(plain, killed) < 0.01
    assert np.array_equal(plain, killed)


def test_killing_records_structure():
    g = Geometry.line(0.2)
    recs = sample_first_k_with_killing(g, 1000, 5, KillingSpec(500.0), RngStream(8))
    accepted = [r for r in recs if not r.killed]
    assert len(accepted) <= 5
    times = [r.time for r in accepted]
    assert all(a < b for a, b in zip(times, times[1:]))
    assert [r.rank for r in accepted] == list(range(1, len(accepted) + 1))
    all_times = [r.time for r in recs]
    assert all(a < b for a, b in zip(all_times, all_times[1:]))


def test_killing_exhaustion_returns_partial():
    # an extreme rate kills nearly every candidate; the run stops on the
    # candidate budget or the validity window and returns what it has
    g = Geometry.line(1.0)
    recs = sample_first_k_with_killing(g, 30, 10, KillingSpec(1e6), RngStream(10),
                                       f_max=0.9)
    accepted = [r for r in recs if not r.killed]
    assert len(accepted) < 10
    assert any(r.killed for r in recs)


def _first_accepted_times(gamma, replicas, seed):
    g = Geometry.line(0.2)
    out = []
    for r in range(replicas):
        recs = sample_first_k_with_killing(g, 1000, 1, KillingSpec(gamma),
                                           RngStream(seed, r))
        acc = [rec for rec in recs if not rec.killed]
        if acc:
            out.append(acc[0].time)
    return np.array(out)


def test_killing_changes_the_arrival_distribution():
    # direction of the mean shift is deliberately not asserted; the
    # histograms must differ distributionally across killing rates
    t_plain = _first_accepted_times(0.0, 4000, seed=20)
    t_kill = _first_accepted_times(500.0, 4000, seed=21)
    assert ks_statistic(t_plain, t_kill) > 0.05


def test_killing_accepted_density_reweighted():
    """First-candidate accepted times follow n f exp(-n F) exp(-gamma t)."""
    g = Geometry.line(0.2)
    n, gamma, replicas = 1000, 200.0, 20_000
    kept = []
    for r in range(replicas):
        recs = sample_first_k_with_killing(g, n, 1, KillingSpec(gamma),
                                           RngStream(31, r))
        if recs and not recs[0].killed:  # first candidate accepted
            kept.append(recs[0].time)

    def density(t):
        t = np.asarray(t, dtype=float)
        f = np.asarray(exit_cdf(g, t), dtype=float)
        return (n * np.asarray(exit_pdf(g, t), dtype=float)
                * np.exp(-n * f) * np.exp(-gamma * t))

    p, stat, dof = chi_square_gof(kept, density, n_bins=50)
    assert p > 0.01


# --- joint law of consecutive arrivals -------------------------------------


def _pair_samples(n, replicas, seed, f_max=0.5):
    pairs = []
    for r in range(replicas):
        try:
            recs = sample_first_k(LINE, n, 2, RngStream(seed, r), f_max=f_max)
        except ValidityError:
            continue
        pairs.append((recs[0].time, recs[1].time))
    return np.array(pairs)


def _quantile_edges(x, m):
    qs = np.quantile(x, np.linspace(0.0, 1.0, m + 1))
    qs[0] -= 1e-12
    qs[-1] += 1e-12
    return np.unique(qs)


def test_joint_chi_square_large_n():
    # at n = 2000 the exponential-increment approximation error O(n F^2)
    # sits far below the binned noise floor
    n, replicas = 2000, 8000
    pairs = _pair_samples(n, replicas, seed=91)
    s_edges = _quantile_edges(pairs[:, 0], 6)
    t_edges = _quantile_edges(pairs[:, 1], 6)
    p, stat, dof = chi_square_2d(
        pairs, lambda a, b, c, d: joint_cell_mass(LINE, n, 1, a, b, c, d),
        s_edges, t_edges)
    assert p > 0.01


@pytest.mark.xfail(
    strict=True,
    reason="the exit-probability recursion uses exponential increments of F, "
           "a large-n approximation; at n=2 its joint law deviates from the "
           "exact consecutive-order-statistic density by an exp(-F(s)-F(t)) "
           "factor that a binned chi-square detects")
def test_joint_chi_square_n_two_spec_conflict():
    n, replicas = 2, 20_000
    pairs = _pair_samples(n, replicas, seed=17, f_max=0.9)
    s_edges = _quantile_edges(pairs[:, 0], 6)
    t_edges = _quantile_edges(pairs[:, 1], 6)
    p, stat, dof = chi_square_2d(
        pairs, lambda a, b, c, d: joint_cell_mass(LINE, n, 1, a, b, c, d),
        s_edges, t_edges)
    assert p > 0.01


def test_first_arrival_law_holds_in_3d():
    # the closed-form 3D inversion path obeys the same fastest-arrival law
    g = Geometry.ball([1.0], [0.1])
    n, replicas = 10_000, 20_000
    times = np.array([sample_first_k(g, n, 1, RngStream(2033, r))[0].time
                      for r in range(replicas)])
    from conftest import ks_one_sample
    from extremefpt.survival import fastest_survival as fs
    d = ks_one_sample(times, lambda t: 1.0 - float(fs(g, n, t)))
    assert d < 0.012


def test_first_arrival_law_holds_in_2d():
    g = Geometry.disc([1.0], [0.05])
    n, replicas = 1000, 20_000
    times = np.array([sample_first_k(g, n, 1, RngStream(2034, r))[0].time
                      for r in range(replicas)])
    from conftest import ks_one_sample
    from extremefpt.survival import fastest_survival as fs
    d = ks_one_sample(times, lambda t: 1.0 - float(fs(g, n, t)))
    assert d < 0.012
