"""Command-line front end for campaigns, validation, and benchmarks.

Exit codes: 0 ok, 2 spec error, 3 validity-window breach with partial
output written, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .campaign import (COMMANDS, RunResult, RunSpec, run_bench, run_mfat,
                       run_oracle_cmd, run_sample, run_split, run_validate)
from .errors import DomainError, ExtremeFptError

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_VALIDITY = 3
EXIT_FAIL = 4


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in text.split(",") if x.strip())


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dim", type=int, default=1, choices=(1, 2, 3))
    parser.add_argument("--diffusion", type=float, default=1.0)
    parser.add_argument("--delta", dest="deltas", type=_floats, default=(1.0,),
                        metavar="F[,F]", help="geodesic distances to the targets")
    parser.add_argument("--eps", dest="sizes", type=_floats, default=(),
                        metavar="F[,F]", help="2D window half-widths")
    parser.add_argument("--radius", dest="radii", type=_floats, default=(),
                        metavar="F[,F]", help="3D window radii")
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--k", type=int, default=1)
    parser.add_argument("--replicas", type=int, default=1)
    parser.add_argument("--gamma", type=float, default=0.0)
    parser.add_argument("--alpha", type=float, default=0.0,
                        help="emission rate; 0 means instantaneous release")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--f-max", dest="f_max", type=float, default=0.5)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        default="csv")
    parser.add_argument("--config", type=str, default=None,
                        help="key=value or JSON file with flag defaults; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extremefpt",
        description="Trajectory-free sampling of extreme first-passage statistics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample the first k ordered arrivals")
    _add_common(p)

    p = sub.add_parser("mfat", help="mean fastest arrival time table")
    _add_common(p)
    p.add_argument("--n-grid", dest="n_grid", type=_ints, default=())
    p.add_argument("--alpha-grid", dest="alpha_grid", type=_floats, default=())

    p = sub.add_parser("split", help="splitting probability table")
    _add_common(p)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_floats, default=(1.0,))
    p.add_argument("--n-grid", dest="n_grid", type=_ints, default=())

    p = sub.add_parser("oracle", help="brute-force Brownian reference")
    _add_common(p)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=1_000_000)

    p = sub.add_parser("validate", help="sampler vs oracle acceptance checks")
    _add_common(p)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=1_000_000)
    p.add_argument("--ranks", type=_ints, default=(1, 3, 10))

    p = sub.add_parser("bench", help="runtime scaling report")
    _add_common(p)
    return parser


def _load_config(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line is not key=value: {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_CONFIG_CONVERTERS = {
    "deltas": _floats, "sizes": _floats, "radii": _floats,
    "n_grid": _ints, "alpha_grid": _floats, "lambda_grid": _floats,
    "ranks": _ints,
    "dim": int, "n": int, "k": int, "replicas": int, "seed": int,
    "threads": int, "max_steps": int,
    "diffusion": float, "gamma": float, "alpha": float, "f_max": float,
    "dt": float,
    "out": str, "fmt": str,
}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    config = _load_config(known.config)
    defaults = {}
    for key, value in config.items():
        key = key.replace("-", "_")
        if key == "format":
            key = "fmt"
        conv = _CONFIG_CONVERTERS.get(key)
        if conv is None:
            raise DomainError(f"unknown config key {key!r}")
        defaults[key] = conv(value) if isinstance(value, str) else value
    for action in parser._subparsers._group_actions:  # push into every subcommand
        for sub in action.choices.values():
            sub.set_defaults(**{k: v for k, v in defaults.items()
                                if any(a.dest == k for a in sub._actions)})
    return argv


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    sizes = args.sizes or getattr(args, "radii", ())
    fields = dict(
        command=args.command, dim=args.dim, diffusion=args.diffusion,
        deltas=args.deltas, sizes=sizes, n=args.n, k=args.k,
        replicas=args.replicas, gamma=args.gamma, alpha=args.alpha,
        seed=args.seed, threads=args.threads, f_max=args.f_max,
        out=args.out, fmt=args.fmt,
    )
    for opt in ("dt", "max_steps", "n_grid", "alpha_grid", "lambda_grid", "ranks"):
        if hasattr(args, opt):
            fields[opt] = getattr(args, opt)
    return RunSpec(**fields)


def _emit(result: RunResult, spec: RunSpec) -> None:
    if spec.out:
        result.write(spec.out, spec.fmt)
    summary = dict(result.summary)
    summary.pop("checks", None)
    print(json.dumps({"summary": summary}, indent=1, default=str))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        spec = _spec_from_args(args)
    except (DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        if spec.command == "sample":
            result = run_sample(spec)
        elif spec.command == "oracle":
            result = run_oracle_cmd(spec)
        elif spec.command == "mfat":
            result = run_mfat(spec)
        elif spec.command == "split":
            result = run_split(spec)
        elif spec.command == "bench":
            result = run_bench(spec)
        else:
            result = run_validate(spec)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except ExtremeFptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    _emit(result, spec)
    if spec.command == "validate":
        for check in result.summary["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"{status} {check['name']}: {check['value']:.5g} "
                  f"(threshold {check['threshold']:.5g})")
        if not result.summary["passed"]:
            return EXIT_FAIL
        return EXIT_OK
    breach = any("validity breach" in w or "partial" in w
                 for w in result.warnings)
    return EXIT_VALIDITY if breach else EXIT_OK


def entry() -> None:
    raise SystemExit(main())
