"""Command-line driver: ``leverkit <subcommand> [options]``.

Exit status is 0 on success, 2 when a selection threshold was not met (a
partial result is still written) and 1 on errors or violated bounds.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import logging
import sys
import time

import numpy as np

from . import __version__
from .bench import FIG1_COLUMNS, BenchConfig, figure1_sweep, run_bench
from .bounds import verify_cca_bound, verify_gcss_bound, verify_general_bound, verify_topk_bound
from .exceptions import LeverkitError, MatrixParseError
from .instances import altschuler_instance, powerlaw_instance, random_lowrank_instance
from .io import (
    RunReport,
    dumps_reports,
    load_matrix,
    split_columns,
    write_matrix,
    write_report,
    write_text,
)
from .leverage import IndexSet, generalized_leverage_scores
from .linalg import DEFAULT_RANK_TOL, as_matrix, projection_energy, svd
from .selection import choose_singular_set, gcss, greedy_gcss, random_baseline, sparse_cca

log = logging.getLogger("leverkit")

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p, *, inputs=True, eps=False, r=False, k=False, seed=False):
    if inputs:
        p.add_argument("--input", help="matrix file (CSV or Matrix Market); split into A|B "
                       "when --input-b is absent")
        p.add_argument("--input-b", help="target matrix B (same row count as A)")
        p.add_argument("--format", choices=["csv", "mm"], help="input format (default: by suffix)")
        p.add_argument("--header", action="store_true", help="CSV input has one header row")
        p.add_argument("--split", type=float, default=0.5, help="column fraction going to A")
        p.add_argument("--center", action="store_true", help="subtract column means first")
    if eps:
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--sigma-omega-mode", choices=["proof", "statement"], default="proof")
    if r:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--r-set", type=_int_list, help="explicit 1-based singular indices")
        g.add_argument("--r-size", type=int, help="fixed |R| (experimental mode)")
    if k:
        p.add_argument("--k", type=int, required=True, help="number of columns")
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--dry-run", action="store_true", help="omit timing fields from the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leverkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scores", help="generalized leverage scores of A for an index set R")
    _common(p, r=True)
    p.add_argument("--delta", type=float, default=None,
                   help="choose R from B's energy when neither --r-set nor --r-size is given")

    p = sub.add_parser("gcss", help="deterministic leverage selection for a target B")
    _common(p, eps=True, r=True)
    p.add_argument("--retained-energy", type=float, default=0.75)

    p = sub.add_parser("cca", help="two-sided selection for sparse CCA")
    _common(p, eps=True)

    p = sub.add_parser("greedy", help="greedy forward selection baseline")
    _common(p, k=True)

    p = sub.add_parser("random", help="uniform random column baseline")
    _common(p, k=True, seed=True)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("gen", help="write a synthetic instance")
    p.add_argument("kind", choices=["altschuler", "powerlaw", "lowrank"])
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--k", type=int, default=5, help="powerlaw: leverage rank")
    p.add_argument("--rank", type=int, default=5, help="lowrank: rank")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--p", type=int, default=3, help="lowrank: columns of B")
    p.add_argument("--cap", action="store_true", help="powerlaw: cap leverage targets at 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "mm"], default=None)
    p.add_argument("--out", required=True, help="path for A (or the only matrix)")
    p.add_argument("--out-b", help="path for B, where the generator has one")

    p = sub.add_parser("verify", help="check the bounds on one instance or a seeded ensemble")
    _common(p, eps=True, r=True, seed=True)
    p.add_argument("--check", choices=["topk", "general", "gcss", "cca"], default="gcss")
    p.add_argument("--columns", type=_int_list, help="column subset S for topk/general")
    p.add_argument("--k", type=int, help="rank for the topk check")
    p.add_argument("--trials", type=int, default=50, help="ensemble size without --input")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--n", type=int, default=8)

    p = sub.add_parser("bench", help="GLS vs greedy vs random sweep")
    p.add_argument("--input", nargs="+", required=True, help="one or more matrix files")
    p.add_argument("--format", choices=["csv", "mm"], default=None)
    p.add_argument("--header", action="store_true")
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--center", action="store_true")
    p.add_argument("--k", type=_int_list, default=[10, 50, 100], help="k grid, e.g. 10,50,100")
    p.add_argument("--r-fractions", type=_float_list, default=[0.1, 0.25, 0.5])
    p.add_argument("--retained-energy", type=float, default=0.75)
    p.add_argument("--algorithms", default="gls,greedy,random")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--out", help="directory for per-cell reports and bench.json/bench.csv")
    p.add_argument("--dry-run", action="store_true", help="omit timing fields")

    p = sub.add_parser("fig1", help="CSV sweep of the adversarial instance over theta")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--thetas", type=_float_list, default=[1.0, 0.5, 0.2, 0.1, 0.05, 0.01])
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--out", help="CSV path (default: stdout)")
    return parser


def _load_pair(args):
    if not args.input:
        raise LeverkitError("--input is required")
    x = load_matrix(args.input, args.format, header=args.header)
    if args.input_b:
        b = load_matrix(args.input_b, args.format, header=args.header)
        if b.shape[0] != x.shape[0]:
            raise LeverkitError(f"row mismatch: A has {x.shape[0]} rows, B has {b.shape[0]}")
        if args.center:
            x, b = x - x.mean(axis=0), b - b.mean(axis=0)
        meta = {"input": args.input, "input_b": args.input_b, "centered": args.center}
        return x, b, meta
    pair = split_columns(x, args.split, args.center)
    return pair.a, pair.b, {"input": args.input, **pair.metadata}


def _emit(report, args) -> None:
    timings = not getattr(args, "dry_run", False)
    if args.out:
        write_report(report, args.out, timings)
    else:
        sys.stdout.write(dumps_reports(report, timings))


def _ratio(obj, a, b, rank_tol):
    ref = projection_energy(a, b, rank_tol)
    return None if ref <= 0 else obj / ref


def _selection_dict(sel):
    return {"selected": list(sel.indices), "mass": sel.achieved_mass, "threshold": sel.threshold,
            "satisfied": sel.satisfied}


def cmd_scores(args) -> int:
    if args.r_set is not None and not args.input_b:
        # an explicit R needs no target, so the whole file is A
        a, b, meta = as_matrix(load_matrix(args.input, args.format, header=args.header)), None, {
            "input": args.input}
    else:
        a, b, meta = _load_pair(args)
    t0 = time.perf_counter()
    fac = svd(a, args.rank_tol)
    t1 = time.perf_counter()
    if args.r_set is not None:
        r = IndexSet.of(args.r_set)
    else:
        delta = None if args.r_size is not None else (0.1 if args.delta is None else args.delta)
        r = choose_singular_set(fac, b, delta, args.r_size)
    scores = generalized_leverage_scores(fac, r)
    t2 = time.perf_counter()
    report = RunReport(
        algorithm="scores",
        parameters={"r_set": list(r.indices), "r_size": len(r)},
        instance={**meta, "shape_a": list(a.shape)},
        details={"scores": scores.scores.tolist(), "order": [int(p) + 1 for p in scores.order()],
                 "total": scores.total, "target_met": r.target_met},
        timings_ms={"svd": (t1 - t0) * 1e3, "selection": (t2 - t1) * 1e3, "total": (t2 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_OK if r.target_met else EXIT_PARTIAL


def cmd_gcss(args) -> int:
    a, b, meta = _load_pair(args)
    t0 = time.perf_counter()
    fac = svd(a, args.rank_tol)
    t1 = time.perf_counter()
    if args.r_set is not None:
        raise LeverkitError("gcss chooses R itself; use --r-size for a fixed |R|")
    res = gcss(a, b, args.epsilon, args.delta, args.r_size, retained_energy=args.retained_energy,
               sigma_omega_mode=args.sigma_omega_mode, rank_tol=args.rank_tol, fac=fac)
    t2 = time.perf_counter()
    report = RunReport(
        algorithm="gcss",
        parameters={"epsilon": args.epsilon, "delta": args.delta, "r_size": len(res.r_set),
                    "r_size_cap": args.r_size, "sigma_omega_mode": args.sigma_omega_mode},
        instance={**meta, "shape_a": list(a.shape), "shape_b": list(b.shape)},
        selected=list(res.selection.indices),
        details={"r_set": list(res.r_set.indices), "r_target_met": res.r_set.target_met,
                 "sigma_mu": res.sigma_mu, "sigma_omega": res.sigma_omega,
                 "mass": res.selection.achieved_mass, "mass_threshold": res.selection.threshold},
        objective=res.objective,
        objective_ratio=_ratio(res.objective, a, b, args.rank_tol),
        bounds={"objective_lower_bound": res.bound if res.satisfied else None,
                "bound_claimed": res.satisfied},
        status="ok" if res.satisfied else "threshold-unmet",
        timings_ms={"svd": (t1 - t0) * 1e3, "selection": (t2 - t1) * 1e3, "total": (t2 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_OK if res.satisfied else EXIT_PARTIAL


def cmd_cca(args) -> int:
    a, b, meta = _load_pair(args)
    t0 = time.perf_counter()
    res = sparse_cca(a, b, args.epsilon, args.delta, sigma_omega_mode=args.sigma_omega_mode,
                     rank_tol=args.rank_tol)
    t1 = time.perf_counter()
    report = RunReport(
        algorithm="cca",
        parameters={"epsilon": args.epsilon, "delta": args.delta,
                    "sigma_omega_mode": args.sigma_omega_mode},
        instance={**meta, "shape_a": list(a.shape), "shape_b": list(b.shape)},
        selected=list(res.s_a.indices),
        details={"s_a": _selection_dict(res.s_a), "s_b": _selection_dict(res.s_b),
                 "r_set": list(res.r_set.indices), "t_set": list(res.t_set.indices),
                 "q": res.q, "q_prime": res.q_prime},
        objective=res.achieved,
        objective_ratio=None if res.q <= 0 else res.achieved / res.q,
        bounds={"cca_lower_bound": res.bound if res.satisfied else None,
                "bound_claimed": res.satisfied},
        status="ok" if res.satisfied else "threshold-unmet",
        timings_ms={"total": (t1 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_OK if res.satisfied else EXIT_PARTIAL


def cmd_greedy(args) -> int:
    a, b, meta = _load_pair(args)
    t0 = time.perf_counter()
    res = greedy_gcss(a, b, args.k)
    t1 = time.perf_counter()
    report = RunReport(
        algorithm="greedy",
        parameters={"k": args.k},
        instance={**meta, "shape_a": list(a.shape), "shape_b": list(b.shape)},
        selected=list(res.indices),
        details={"trace": res.trace.tolist(), "complete": res.complete},
        objective=res.objective,
        objective_ratio=_ratio(res.objective, a, b, args.rank_tol),
        status="ok" if res.complete else "stopped-early",
        timings_ms={"selection": (t1 - t0) * 1e3, "total": (t1 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_OK


def cmd_random(args) -> int:
    a, b, meta = _load_pair(args)
    t0 = time.perf_counter()
    res = random_baseline(a, b, args.k, args.trials, args.seed, rank_tol=args.rank_tol)
    t1 = time.perf_counter()
    report = RunReport(
        algorithm="random",
        parameters={"k": args.k, "trials": args.trials, "seed": args.seed},
        instance={**meta, "shape_a": list(a.shape), "shape_b": list(b.shape)},
        details={"trial_objectives": res.objectives.tolist(),
                 "trial_selections": [list(s) for s in res.selections]},
        objective=res.mean,
        objective_ratio=_ratio(res.mean, a, b, args.rank_tol),
        timings_ms={"selection": (t1 - t0) * 1e3, "total": (t1 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "altschuler":
        pair = altschuler_instance(args.n, args.theta)
        a, b = pair.a, pair.b
    elif args.kind == "lowrank":
        pair = random_lowrank_instance(args.m, args.n, args.rank, args.noise, args.seed, p=args.p)
        a, b = pair.a, pair.b
    else:
        inst = powerlaw_instance(args.m, args.n, args.k, args.eta, args.seed, cap=args.cap)
        a, b = inst.a, None
    write_matrix(a, args.out, args.format)
    if args.out_b:
        if b is None:
            raise LeverkitError(f"the {args.kind} generator has no B matrix")
        write_matrix(b, args.out_b, args.format)
    return EXIT_OK


def _verify_one(a, b, args, rng=None):
    """Bound reports for one instance; ``rng`` draws S/R/k when they were not given."""
    n = a.shape[1]
    fac = svd(a, args.rank_tol)
    cols = args.columns
    if cols is None and args.check in {"topk", "general"}:
        size = int(rng.integers(1, n + 1)) if rng is not None else n
        cols = sorted(int(c) + 1 for c in (rng.permutation(n)[:size] if rng is not None
                                           else range(n)))
    if args.check == "topk":
        ks = [args.k] if args.k else range(1, fac.numerical_rank + 1)
        return [verify_topk_bound(a, cols, k, fac=fac) for k in ks]
    if args.check == "general":
        if args.r_set is not None:
            r = args.r_set
        elif rng is not None:
            size = int(rng.integers(1, fac.numerical_rank + 1))
            r = sorted(int(i) + 1 for i in rng.permutation(fac.numerical_rank)[:size])
        else:
            r = [fac.numerical_rank]
        rep = verify_general_bound(a, cols, r, args.epsilon, fac=fac)
        return [x for x in (rep.proof_mode, rep.statement_mode, rep.epsilon_form) if x is not None]
    if args.check == "gcss":
        res = gcss(a, b, args.epsilon, args.delta, args.r_size,
                   sigma_omega_mode=args.sigma_omega_mode, rank_tol=args.rank_tol, fac=fac)
        if not res.satisfied:
            return []
        return [verify_gcss_bound(a, b, res.selection.indices, args.epsilon, args.delta)]
    res = sparse_cca(a, b, args.epsilon, args.delta, sigma_omega_mode=args.sigma_omega_mode,
                     rank_tol=args.rank_tol)
    if not res.satisfied:
        return []
    return [verify_cca_bound(res.achieved, res.q, args.epsilon, args.delta)]


def cmd_verify(args) -> int:
    reports = []
    skipped = 0
    t0 = time.perf_counter()
    if args.input:
        a, b, meta = _load_pair(args)
        reports = _verify_one(a, b, args)
        skipped = int(not reports)
    else:
        meta = {"ensemble": args.trials, "m": args.m, "n": args.n, "seed": args.seed}
        for t in range(args.trials):
            rng = np.random.default_rng([args.seed, t])
            rank = int(rng.integers(1, min(args.m, args.n) + 1))
            pair = random_lowrank_instance(args.m, args.n, rank, 0.0, int(rng.integers(2**31)),
                                           p=2, out_of_range=0.0)
            a, b = pair.a, pair.b
            if args.center:
                a, b = a - a.mean(axis=0), b - b.mean(axis=0)
            got = _verify_one(a, b, args, rng)
            skipped += int(not got)
            reports.extend(got)
    t1 = time.perf_counter()
    violated = [r for r in reports if not r.satisfied]
    report = RunReport(
        algorithm=f"verify-{args.check}",
        parameters={"epsilon": args.epsilon, "delta": args.delta, "seed": args.seed,
                    "sigma_omega_mode": args.sigma_omega_mode},
        instance=meta,
        details={"checked": len(reports), "skipped_unmet": skipped, "violations": len(violated),
                 "min_slack": min((r.slack for r in reports), default=None),
                 "first_violation": violated[0].to_dict() if violated else None},
        status="ok" if not violated else "bound-violated",
        timings_ms={"total": (t1 - t0) * 1e3},
    )
    _emit(report, args)
    return EXIT_ERROR if violated else EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig(
        inputs=list(args.input), k_grid=tuple(args.k), split_fraction=args.split,
        retained_energy=args.retained_energy, r_fractions=tuple(args.r_fractions),
        algorithms=tuple(a for a in args.algorithms.split(",") if a), epsilon=args.epsilon,
        trials=args.trials, seed=args.seed, center=args.center, output_dir=args.out,
        repeats=args.repeats, workers=args.workers, dry_run=args.dry_run,
        rank_tol=args.rank_tol, header=args.header, input_format=args.format,
    )
    reports = run_bench(config)
    if not args.out:
        sys.stdout.write(dumps_reports(reports, not args.dry_run))
    if any(r.status.startswith("error") for r in reports):
        return EXIT_ERROR
    if any(r.status != "ok" for r in reports):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_fig1(args) -> int:
    rows = figure1_sweep(args.n, args.thetas, args.rank_tol)
    buf = _stdio.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIG1_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format(v, ".17g") for k, v in row.items()})
    if args.out:
        write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "scores": cmd_scores, "gcss": cmd_gcss, "cca": cmd_cca, "greedy": cmd_greedy,
    "random": cmd_random, "gen": cmd_gen, "verify": cmd_verify, "bench": cmd_bench,
    "fig1": cmd_fig1,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except MatrixParseError as exc:
        print(f"leverkit: parse error: {exc}", file=sys.stderr)
    except (LeverkitError, ValueError, OSError) as exc:
        print(f"leverkit: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
