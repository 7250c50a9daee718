"""Campaign execution: replica fan-out, summaries, CSV/JSON output.

A campaign runs `replicas` independent copies of a sampler, each on its
own counter-based stream derived from (seed, replica id), so results
are bit-identical for a given spec regardless of scheduling. Rows merge
in (replica, rank) order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .emission import (EmissionProfile, classify_regime, mfat_emission_numerical,
                       mfat_fast_asymptotic, mfat_intermediate_asymptotic,
                       mfat_slow_asymptotic, sample_first_k_emission)
from .errors import DomainError, ValidityError
from .geometry import Geometry, Target
from .oracle import OracleSpec, compare_distributions, ks_statistic, run_oracle_campaign
from .rng import RngStream
from .sampling import KillingSpec, sample_first_k, sample_first_k_with_killing
from .splitting import splitting_asymptotic, splitting_integral
from .survival import mfat_instantaneous, time_horizon

COMMANDS = ("sample", "mfat", "split", "oracle", "validate", "bench")
CSV_HEADER = ("replica", "rank", "time", "target", "killed")

# oracle stream ids live in a disjoint block from sampler replicas
ORACLE_STREAM_TAG = 1


@dataclass(frozen=True)
class RunSpec:
    command: str
    dim: int = 1
    diffusion: float = 1.0
    deltas: tuple[float, ...] = (1.0,)
    sizes: tuple[float, ...] = ()
    n: int = 1000
    k: int = 1
    replicas: int = 1
    gamma: float = 0.0
    alpha: float = 0.0
    seed: int = 0
    threads: int = 1
    f_max: float = 0.5
    dt: float = 1e-4
    max_steps: int = 1_000_000
    out: str | None = None
    fmt: str = "csv"
    n_grid: tuple[int, ...] = ()
    alpha_grid: tuple[float, ...] = ()
    lambda_grid: tuple[float, ...] = ()
    ranks: tuple[int, ...] = (1, 3, 10)

    def __post_init__(self):
        for name in ("deltas", "sizes", "n_grid", "alpha_grid", "lambda_grid", "ranks"):
            v = getattr(self, name)
            if not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v))
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.replicas < 1:
            raise DomainError("replicas must be >= 1")
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.gamma < 0.0 or self.alpha < 0.0:
            raise DomainError("gamma and alpha must be >= 0")
        if self.gamma > 0.0 and self.alpha > 0.0:
            raise DomainError("combined killing and emission is not supported")
        if self.fmt not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.fmt!r}")
        if not 0.0 < self.f_max < 1.0:
            raise DomainError("f-max must be in (0, 1)")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")

    def geometry(self) -> Geometry:
        if self.dim == 1:
            return Geometry(1, self.diffusion, tuple(Target(d) for d in self.deltas))
        if len(self.sizes) != len(self.deltas):
            raise DomainError("need one size (eps/radius) per delta for dim > 1")
        return Geometry(self.dim, self.diffusion, tuple(
            Target(d, s) for d, s in zip(self.deltas, self.sizes)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunSpec":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        for name in ("deltas", "sizes", "n_grid", "alpha_grid", "lambda_grid", "ranks"):
            if name in kwargs and kwargs[name] is not None:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass
class RunResult:
    spec: RunSpec
    records: list[tuple]                      # (replica, rank, time, target, killed)
    summary: dict
    warnings: list[str] = field(default_factory=list)
    table: list[dict] = field(default_factory=list)   # grid commands

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "records": [list(r) for r in self.records],
            "table": self.table,
            "summary": self.summary,
            "warnings": self.warnings,
        }

    def render_csv(self) -> str:
        buf = io.StringIO()
        if self.table:
            writer = csv.DictWriter(buf, fieldnames=list(self.table[0].keys()),
                                    lineterminator="\n")
            writer.writeheader()
            for row in self.table:
                writer.writerow({k: _fmt(v) for k, v in row.items()})
        else:
            buf.write(",".join(CSV_HEADER) + "\n")
            for replica, rank, t, target, killed in self.records:
                buf.write(f"{replica},{rank},{t:.17g},{target},{killed}\n")
        return buf.getvalue()

    def write(self, path: str, fmt: str) -> None:
        with open(path, "w") as fh:
            if fmt == "json":
                json.dump(self.to_json_dict(), fh, indent=1)
                fh.write("\n")
            else:
                fh.write(self.render_csv())


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _sample_replica_range(spec: RunSpec, lo: int, hi: int) -> tuple[list[tuple], list[str]]:
    g = spec.geometry()
    base = RngStream(spec.seed)
    rows: list[tuple] = []
    warnings: list[str] = []
    phi = EmissionProfile(spec.alpha) if spec.alpha > 0.0 else None
    kill = KillingSpec(spec.gamma)
    for r in range(lo, hi):
        rng = base.replica(r)
        try:
            if phi is not None:
                recs = sample_first_k_emission(g, phi, spec.n, spec.k, rng,
                                               f_max=spec.f_max)
            elif spec.gamma > 0.0:
                recs = sample_first_k_with_killing(g, spec.n, spec.k, kill, rng,
                                                   f_max=spec.f_max)
                n_acc = sum(1 for rec in recs if not rec.killed)
                if n_acc < spec.k:
                    warnings.append(f"replica {r}: partial killing results "
                                    f"({n_acc} of {spec.k} accepted)")
            else:
                recs = sample_first_k(g, spec.n, spec.k, rng, f_max=spec.f_max)
        except ValidityError as exc:
            recs = exc.partial
            warnings.append(f"replica {r}: validity breach, "
                            f"F reached {exc.f_value:.6g}; partial results kept")
        rows.extend((r, rec.rank, rec.time, rec.target, int(rec.killed))
                    for rec in recs)
    return rows, warnings


def _oracle_replica_range(spec: RunSpec, lo: int, hi: int) -> tuple[list[tuple], list[str]]:
    ospec = oracle_spec_from(spec)
    rng = RngStream(spec.seed, lo).domain(ORACLE_STREAM_TAG)
    rows: list[tuple] = []
    warnings: list[str] = []
    per_replica = run_oracle_campaign(ospec, hi - lo, rng)
    for offset, recs in enumerate(per_replica):
        r = lo + offset
        if len(recs) < spec.k:
            warnings.append(f"replica {r}: oracle recorded {len(recs)} of {spec.k} "
                            "arrivals before the step cap")
        rows.extend((r, rec.rank, rec.time, rec.target, int(rec.killed))
                    for rec in recs)
    return rows, warnings


def oracle_spec_from(spec: RunSpec) -> OracleSpec:
    if spec.dim != 1:
        raise DomainError("the Brownian oracle is 1D only")
    if len(spec.deltas) == 1:
        absorbers: tuple[float, ...] = (0.0,)
        source = spec.deltas[0]
    else:
        absorbers = (0.0, spec.deltas[0] + spec.deltas[1])
        source = spec.deltas[0]
    return OracleSpec(source=source, absorbers=absorbers, diffusion=spec.diffusion,
                      dt=spec.dt, n=spec.n, k=spec.k, gamma=spec.gamma,
                      alpha=spec.alpha, max_steps=spec.max_steps)


def _dispatch_ranges(spec: RunSpec, worker, *, range_size: int | None = None,
                     ) -> tuple[list[tuple], list[str]]:
    """Fan replicas out over fixed ranges; output is scheduling-independent.

    Sampler replicas each own a (seed, replica) stream, so any
    partition gives identical rows. The oracle draws one stream per
    range keyed by the range start, so `range_size` pins the partition
    independent of the thread count.
    """
    if range_size is None:
        if spec.threads == 1 or spec.replicas == 1:
            return worker(spec, 0, spec.replicas)
        bounds = np.linspace(0, spec.replicas,
                             min(spec.threads * 4, spec.replicas) + 1).astype(int)
        ranges = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])
                  if hi > lo]
    else:
        ranges = [(lo, min(lo + range_size, spec.replicas))
                  for lo in range(0, spec.replicas, range_size)]
    rows: list[tuple] = []
    warnings: list[str] = []
    if spec.threads == 1 or len(ranges) == 1:
        for lo, hi in ranges:
            r, w = worker(spec, lo, hi)
            rows.extend(r)
            warnings.extend(w)
    else:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            futures = [pool.submit(worker, spec, lo, hi) for lo, hi in ranges]
            for fut in futures:
                r, w = fut.result()
                rows.extend(r)
                warnings.extend(w)
    rows.sort(key=lambda row: (row[0], row[1], row[2], row[3], row[4]))
    return rows, warnings


def _oracle_range_size(spec: RunSpec) -> int:
    return max(1, 4_000_000 // max(1, spec.n))


def summarize_records(records: list[tuple]) -> dict:
    per_rank: dict[int, dict] = {}
    accepted = [row for row in records if not row[4]]
    ranks = sorted({row[1] for row in accepted})
    for k in ranks:
        times = np.array([row[2] for row in accepted if row[1] == k])
        per_rank[k] = {
            "count": int(times.size),
            "mean": float(times.mean()),
            "variance": float(times.var(ddof=1)) if times.size > 1 else 0.0,
        }
    return {"per_rank": per_rank}


def run_sample(spec: RunSpec) -> RunResult:
    """Dispatch the sampler (plain, killing, or emission) over replicas."""
    g = spec.geometry()
    rows, warnings = _dispatch_ranges(spec, _sample_replica_range)
    summary = summarize_records(rows)
    if spec.gamma > 0.0:
        all_times = np.array([row[2] for row in rows if row[1] == 1])
        acc_times = np.array([row[2] for row in rows if row[1] == 1 and not row[4]])
        summary["killing"] = {
            "gamma": spec.gamma,
            "candidates": len(rows),
            "accepted": sum(1 for row in rows if not row[4]),
            "mean_t1_accepted": float(acc_times.mean()) if acc_times.size else math.nan,
            "mean_t1_all_candidates": float(all_times.mean()) if all_times.size else math.nan,
        }
    if spec.alpha > 0.0:
        est = classify_regime(g, spec.alpha, spec.n, include_numerical=False)
        summary["regime"] = {"label": est.regime, "closed_form_mfat": est.mfat,
                             "validity": est.validity}
        horizon = time_horizon(g, spec.f_max)
        late = [row for row in rows if row[2] > horizon]
        if late:
            warnings.append(f"{len(late)} arrivals beyond the instantaneous "
                            "validity window; inner convolution extrapolates there")
    summary["warnings"] = warnings
    return RunResult(spec, rows, summary, warnings)


def run_oracle_cmd(spec: RunSpec) -> RunResult:
    rows, warnings = _dispatch_ranges(spec, _oracle_replica_range,
                                      range_size=_oracle_range_size(spec))
    summary = summarize_records(rows)
    summary["warnings"] = warnings
    return RunResult(spec, rows, summary, warnings)


def run_mfat(spec: RunSpec) -> RunResult:
    """MFAT table over n and alpha grids with all applicable estimates."""
    g = spec.geometry()
    ns = spec.n_grid or (spec.n,)
    alphas = spec.alpha_grid or ((spec.alpha,) if spec.alpha > 0.0 else (0.0,))
    table: list[dict] = []
    warnings: list[str] = []
    for n in ns:
        inst = mfat_instantaneous(g, n, f_max=spec.f_max)
        if not inst.decayed:
            warnings.append(f"n={n}: integrand not decayed at the window edge")
        for alpha in alphas:
            row: dict = {"n": n, "alpha": alpha,
                         "mfat_instantaneous": inst.value,
                         "leading_order": inst.leading_order}
            if alpha > 0.0:
                phi = EmissionProfile(alpha)
                num = mfat_emission_numerical(g, phi, n)
                if not num.decayed:
                    warnings.append(f"n={n} alpha={alpha}: emission integrand "
                                    "not decayed at truncation")
                est = classify_regime(g, alpha, n, include_numerical=False)
                fast = mfat_fast_asymptotic(g, alpha, n, f_max=spec.f_max)
                try:  # slow and intermediate forms exist for 1D point sources
                    slow_value = mfat_slow_asymptotic(g, alpha, n).value
                    inter = mfat_intermediate_asymptotic(g, alpha, n)
                except DomainError:
                    slow_value = math.nan
                    inter = math.nan
                row.update({
                    "mfat_numerical": num.value,
                    "regime": est.regime,
                    "mfat_slow": slow_value,
                    "mfat_intermediate": inter,
                    "mfat_fast": fast.value,
                    "rel_err_slow": (num.value - slow_value) / slow_value,
                    "rel_err_intermediate": (num.value - inter) / inter,
                    "rel_err_fast": (num.value - fast.value) / fast.value,
                })
            else:
                row.update({"mfat_numerical": inst.value, "regime": "instantaneous",
                            "mfat_slow": math.nan, "mfat_intermediate": math.nan,
                            "mfat_fast": math.nan, "rel_err_slow": math.nan,
                            "rel_err_intermediate": math.nan, "rel_err_fast": math.nan})
            table.append(row)
    return RunResult(spec, [], {"warnings": warnings}, warnings, table)


def run_split(spec: RunSpec) -> RunResult:
    """Splitting-probability table over lambda and n grids."""
    lams = spec.lambda_grid or (1.0,)
    ns = spec.n_grid or (spec.n,)
    table = []
    for lam in lams:
        for n in ns:
            integral = splitting_integral(lam, n)
            asym = splitting_asymptotic(lam, n)
            layer = 1.0 / (1.0 + float(n) ** (2.0 * (lam - 1.0)))
            table.append({
                "lambda": lam, "n": n,
                "sp_integral": integral,
                "sp_asymptotic": asym,
                "sp_boundary_layer": layer,
                "gap_asymptotic": abs(integral - asym),
                "gap_boundary_layer": abs(integral - layer),
            })
    return RunResult(spec, [], {"warnings": []}, [], table)


# --- validation -----------------------------------------------------------

VALIDATE_MEAN_TOL = 0.05
VALIDATE_VAR_TOL = 0.15
VALIDATE_KS_TOL = 0.03
VALIDATE_KILL_KS_TOL = 0.01


def _rank_times(rows: list[tuple], rank: int) -> np.ndarray:
    return np.array([row[2] for row in rows if row[1] == rank and not row[4]])


def run_validate(spec: RunSpec, *, corrupt_inversion: bool = False) -> RunResult:
    """Paired sampler and oracle campaigns with pass/fail acceptance checks.

    The corrupt_inversion hook inflates sampler times by 15% and must
    make the validation fail; it exists as a negative control for the
    test suite.
    """
    if spec.dim != 1:
        raise DomainError("validation requires a 1D geometry (oracle constraint)")
    ranks = tuple(spec.ranks)
    k = max(ranks)
    sampler_spec = replace(spec, command="sample", k=k)
    oracle_spec = replace(spec, command="oracle", k=k)
    s_rows, s_warn = _dispatch_ranges(sampler_spec, _sample_replica_range)
    o_rows, o_warn = _dispatch_ranges(oracle_spec, _oracle_replica_range,
                                      range_size=_oracle_range_size(oracle_spec))
    if corrupt_inversion:
        s_rows = [(r, rk, t * 1.15, tg, kd) for (r, rk, t, tg, kd) in s_rows]

    checks: list[dict] = []
    for rank in ranks:
        a = _rank_times(s_rows, rank)
        b = _rank_times(o_rows, rank)
        rep = compare_distributions(a, b, rng=RngStream(spec.seed).domain(7))
        checks.append({
            "name": f"rank {rank} mean gap",
            "value": abs(rep.mean_rel_gap),
            "threshold": VALIDATE_MEAN_TOL,
            "passed": bool(abs(rep.mean_rel_gap) < VALIDATE_MEAN_TOL),
        })
        checks.append({
            "name": f"rank {rank} variance gap",
            "value": abs(rep.var_rel_gap),
            "threshold": VALIDATE_VAR_TOL,
            "passed": bool(abs(rep.var_rel_gap) < VALIDATE_VAR_TOL),
        })
        if rank == 1:
            checks.append({
                "name": "KS distance of t1",
                "value": rep.ks_d,
                "threshold": VALIDATE_KS_TOL,
                "passed": bool(rep.ks_d < VALIDATE_KS_TOL),
            })

    # gamma = 0 killing must match the plain sampler on shared streams
    kill_spec = replace(spec, command="sample", k=1, gamma=0.0)
    plain_rows, _ = _dispatch_ranges(kill_spec, _sample_replica_range)
    g = spec.geometry()
    base = RngStream(spec.seed)
    kill_t1 = []
    for r in range(spec.replicas):
        recs = sample_first_k_with_killing(g, spec.n, 1, KillingSpec(0.0),
                                           base.replica(r), f_max=spec.f_max)
        kill_t1.append(recs[0].time)
    ks_kill = ks_statistic(_rank_times(plain_rows, 1), np.array(kill_t1))
    checks.append({
        "name": "killing gamma=0 equivalence (KS of t1)",
        "value": ks_kill,
        "threshold": VALIDATE_KILL_KS_TOL,
        "passed": bool(ks_kill < VALIDATE_KILL_KS_TOL),
    })

    passed = all(c["passed"] for c in checks)
    summary = {
        "checks": checks,
        "passed": passed,
        "sampler": summarize_records(s_rows)["per_rank"],
        "oracle": summarize_records(o_rows)["per_rank"],
        "warnings": s_warn + o_warn,
    }
    return RunResult(spec, [], summary, s_warn + o_warn,
                     table=[{"check": c["name"], "value": c["value"],
                             "threshold": c["threshold"],
                             "passed": int(c["passed"])} for c in checks])


# --- benchmarking ---------------------------------------------------------

def _time_campaign(spec: RunSpec, repeats: int = 3) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        _sample_replica_range(spec, 0, spec.replicas)
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(spec: RunSpec) -> RunResult:
    """Wall-clock scaling: n-independence, k-linearity, 20 s campaign."""
    base = replace(spec, command="sample", gamma=0.0, alpha=0.0)
    reps = spec.replicas if spec.replicas > 1 else 2000

    n_times = {}
    for n in (10 ** 3, 10 ** 5, 10 ** 8):
        n_times[n] = _time_campaign(replace(base, n=n, k=10, replicas=reps))
    spread = max(n_times.values()) / min(n_times.values())

    k_grid = (1, 10, 25, 50, 75, 100)
    k_times = {k: _time_campaign(replace(base, n=10 ** 5, k=k, replicas=reps))
               for k in k_grid}
    xs = np.array(k_grid, dtype=float)
    ys = np.array([k_times[k] for k in k_grid])
    slope, intercept = np.polyfit(xs, ys, 1)
    fit = slope * xs + intercept
    ss_res = float(np.sum((ys - fit) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    t0 = time.perf_counter()
    _sample_replica_range(replace(base, n=10 ** 5, k=10, replicas=5000), 0, 5000)
    campaign_seconds = time.perf_counter() - t0

    summary = {
        "n_independence": {"times": {str(n): t for n, t in n_times.items()},
                           "spread": spread, "passed": bool(spread <= 2.0)},
        "k_linearity": {"times": {str(k): t for k, t in k_times.items()},
                        "r_squared": r2, "passed": bool(r2 > 0.95)},
        "campaign_20s": {"seconds": campaign_seconds,
                         "passed": bool(campaign_seconds < 20.0)},
        "warnings": [],
    }
    table = [{"metric": "n_spread", "value": spread, "passed": int(spread <= 2.0)},
             {"metric": "k_fit_r2", "value": r2, "passed": int(r2 > 0.95)},
             {"metric": "campaign_seconds", "value": campaign_seconds,
              "passed": int(campaign_seconds < 20.0)}]
    return RunResult(spec, [], summary, [], table)
