"""Command-line entry point: ``gen``, ``path`` and ``solve`` subcommands."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .bounds import lambda_max_sgl
from .harness import DEFAULT_ALPHAS, MODES, run_path
from .model import DegenerateProblemError, PenaltyParams, ProblemData, ProblemValidationError, validate_problem
from .report import emit_report
from .solvers import SolveConfig, kkt_check_sgl, solve_sgl
from .synthetic import SyntheticSpec, gen_synthetic

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
THREADS_ENV = "SGL_SCREEN_THREADS"


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s):
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _alpha_list(s):
    try:
        vals = [_positive_float(t) for t in s.split(",") if t.strip()]
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"alphas must be comma-separated positive numbers, got {s!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("alphas list is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sglscreen", description="Safe screening for sparse-group lasso paths.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic problem to CSV files")
    g.add_argument("kind", choices=["synthetic1", "synthetic2"])
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--p", type=_positive_int, required=True)
    g.add_argument("--groups", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--gamma1", type=_positive_float)
    g.add_argument("--gamma2", type=_positive_float)
    g.add_argument("--support", choices=["group", "feature"], default="group")
    g.add_argument("--noise", type=float, default=0.01)
    g.add_argument("--out-dir", default=".")

    for name, helptext in (("path", "run a regularization path"), ("solve", "solve at one (lambda, alpha)")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--x", required=True, help="design matrix CSV")
        s.add_argument("--y", required=True, help="response, one value per line")
        s.add_argument("--groups", help="zero-based group index per feature (default: one group per feature)")
        s.add_argument("--tol", type=_positive_float, default=1e-8)
        s.add_argument("--max-iter", type=_positive_int, default=20000)

    p = sub.choices["path"]
    p.add_argument("--mode", choices=MODES, default="tlfre")
    p.add_argument("--alphas", type=_alpha_list, default=list(DEFAULT_ALPHAS))
    p.add_argument("--num-lambda", type=_positive_int, default=100)
    p.add_argument("--lambda-min-ratio", type=_positive_float, default=0.01)
    p.add_argument("--out", default="report.csv")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--audit", action="store_true", help="cross-check every discard against an unscreened 1e-12 solve")
    p.add_argument("--threads", type=_positive_int)

    s = sub.choices["solve"]
    lam = s.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=_positive_float)
    lam.add_argument("--lambda-ratio", type=_positive_float, help="lambda as a fraction of lambda_max")
    s.add_argument("--alpha", type=_positive_float, default=1.0)
    s.add_argument("--out", default="beta.csv")
    return ap


def _load(args) -> ProblemData:
    x = dataio.read_matrix(args.x)
    y = dataio.read_vector(args.y)
    groups = dataio.read_groups(args.groups) if args.groups else np.arange(x.shape[1])
    return validate_problem(ProblemData(x, y, groups))


def cmd_gen(args) -> int:
    make = SyntheticSpec.synthetic1 if args.kind == "synthetic1" else SyntheticSpec.synthetic2
    kw = dict(n=args.n, p=args.p, g=args.groups, seed=args.seed, support=args.support, noise_scale=args.noise)
    if args.gamma1 is not None:
        kw["gamma1"] = args.gamma1
    if args.gamma2 is not None:
        kw["gamma2"] = args.gamma2
    data, beta = gen_synthetic(make(**kw))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_matrix(out / "design.csv", data.x)
    dataio.write_vector(out / "response.csv", data.y)
    dataio.write_groups(out / "groups.txt", data.groups.assignment)
    dataio.write_vector(out / "truth.csv", beta)
    print(f"wrote {out}/design.csv ({data.n_samples}x{data.n_features}), response.csv, groups.txt, truth.csv")
    return EXIT_OK


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    return None


def cmd_path(args) -> int:
    threads = _threads(args)
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    data = _load(args)
    cfg = SolveConfig(tol_gap=args.tol, max_iter=args.max_iter)

    def go(workers):
        return run_path(data, args.alphas, args.num_lambda, args.lambda_min_ratio, args.mode,
                        cfg, audit=args.audit, workers=workers)

    if threads is None:
        report = go(1)
    else:
        from threadpoolctl import threadpool_limits

        # parallelism goes to alpha sweeps; keep BLAS single-threaded inside them
        with threadpool_limits(limits=1):
            report = go(threads)
    Path(args.out).write_bytes(emit_report(report, fmt))
    print(f"wrote {len(report.records)} records to {args.out}")
    if args.audit:
        print(f"audit: {report.total_violations} safety violation(s); "
              f"max ball excess {report.max_containment_excess:.3e}")
        if report.total_violations:
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_solve(args) -> int:
    data = _load(args)
    lam = args.lam
    if lam is None:
        crit = lambda_max_sgl(data, args.alpha)
        if crit.degenerate:
            raise DegenerateProblemError("X^T y = 0: lambda_max is zero")
        lam = args.lambda_ratio * crit.lambda_max
    params = PenaltyParams(lam, args.alpha)
    sol = solve_sgl(data, params, SolveConfig(tol_gap=args.tol, max_iter=args.max_iter))
    dataio.write_vector(args.out, sol.beta)
    kkt = kkt_check_sgl(sol.beta, data, params)
    print(f"lambda={lam!r} alpha={args.alpha!r} iterations={sol.iterations} converged={sol.converged}")
    print(f"stationarity_residual={kkt.stationarity_residual!r}")
    print(f"feasibility_residual={kkt.feasibility_residual!r}")
    print(f"gap={kkt.gap!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": cmd_gen, "path": cmd_path, "solve": cmd_solve}[args.command]
    try:
        return handler(args)
    except (OSError, ValueError, ProblemValidationError, DegenerateProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
