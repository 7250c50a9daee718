import math

import numpy as np
from scipy.stats import chi2

from extremefpt.geometry import Geometry
from extremefpt.numerics import integrate
from extremefpt.order_stats import _log_binomial
from extremefpt.survival import exit_cdf, exit_pdf, survival_single


def ks_one_sample(samples, cdf) -> float:
    """One-sample KS statistic against a callable CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    theo = np.array([cdf(v) for v in x])
    upper = np.arange(1, n + 1) / n - theo
    lower = theo - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def chi_square_gof(samples, density, n_bins: int = 50,
                   q_lo: float = 0.005, q_hi: float = 0.995):
    """Chi-square GOF p-value of samples against an unnormalized density.

    Bins are equal-width over the central quantile range; expected
    masses come from quadrature of the density, renormalized over the
    same range. Cells expecting fewer than five counts merge into their
    neighbor.
    """
    x = np.asarray(samples, dtype=float)
    lo, hi = np.quantile(x, [q_lo, q_hi])
    edges = np.linspace(lo, hi, n_bins + 1)
    kept = x[(x >= lo) & (x <= hi)]
    counts, _ = np.histogram(kept, bins=edges)
    masses = np.array([
        integrate(density, a, b, abs_tol=1e-14, rel_tol=1e-9).value
        for a, b in zip(edges[:-1], edges[1:])])
    expected = masses / masses.sum() * kept.size

    # merge sparse cells left to right
    obs_m, exp_m = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        obs_m[-1] += acc_o
        exp_m[-1] += acc_e
    obs_m = np.array(obs_m)
    exp_m = np.array(exp_m)
    stat = float(np.sum((obs_m - exp_m) ** 2 / exp_m))
    dof = obs_m.size - 1
    return float(chi2.sf(stat, dof)), stat, dof


def joint_cell_mass(g: Geometry, n: int, k: int,
                    s_lo: float, s_hi: float, t_lo: float, t_hi: float) -> float:
    """Probability that (tau_k, tau_{k+1}) lands in a rectangle.

    The inner t-integral of the consecutive-pair joint density is
    analytic: int f(t) S(t)^(n-k-1) dt = [-S^(n-k)/(n-k)], leaving a 1D
    quadrature over s.
    """
    pref = math.exp(math.log(k) + _log_binomial(n, k))

    def inner(s):
        s = np.asarray(s, dtype=float)
        f_s = np.asarray(exit_pdf(g, s), dtype=float)
        big_f = np.asarray(exit_cdf(g, s), dtype=float)
        lo_eff = np.maximum(s, t_lo)
        s_at_lo = np.asarray(survival_single(g, lo_eff), dtype=float)
        s_at_hi = float(survival_single(g, t_hi))
        tail = np.where(lo_eff < t_hi,
                        s_at_lo ** (n - k) - s_at_hi ** (n - k), 0.0)
        fpow = np.where(big_f > 0.0, big_f ** (k - 1), 1.0 if k == 1 else 0.0)
        return pref * f_s * fpow * tail

    return integrate(inner, s_lo, s_hi, abs_tol=1e-14, rel_tol=1e-9).value


def chi_square_2d(pairs, cell_mass, s_edges, t_edges):
    """Chi-square of (t_k, t_{k+1}) pairs against rectangle masses."""
    pairs = np.asarray(pairs, dtype=float)
    region = ((pairs[:, 0] >= s_edges[0]) & (pairs[:, 0] <= s_edges[-1])
              & (pairs[:, 1] >= t_edges[0]) & (pairs[:, 1] <= t_edges[-1]))
    kept = pairs[region]
    counts, _, _ = np.histogram2d(kept[:, 0], kept[:, 1],
                                  bins=[s_edges, t_edges])
    masses = np.zeros_like(counts)
    for i in range(len(s_edges) - 1):
        for j in range(len(t_edges) - 1):
            masses[i, j] = cell_mass(s_edges[i], s_edges[i + 1],
                                     t_edges[j], t_edges[j + 1])
    expected = masses / masses.sum() * kept.shape[0]
    keep = expected.ravel() >= 5.0
    obs = counts.ravel()[keep]
    exp = expected.ravel()[keep]
    # fold the sparse remainder into one pooled cell
    rest_o = counts.ravel()[~keep].sum()
    rest_e = expected.ravel()[~keep].sum()
    if rest_e > 0:
        obs = np.append(obs, rest_o)
        exp = np.append(exp, rest_e)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return float(chi2.sf(stat, dof)), stat, dof
