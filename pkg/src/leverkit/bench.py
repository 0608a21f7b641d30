"""Benchmark sweep (leverage selection vs greedy vs random) and the adversarial-instance sweep."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instances import InstancePair, altschuler_instance
from .io import RunReport, load_matrix, split_columns, write_report, write_reports_csv
from .leverage import IndexSet, generalized_leverage_scores, sigma_mu, sigma_omega
from .linalg import DEFAULT_RANK_TOL, as_matrix, projection_energy, retained_rank, svd
from .selection import (
    choose_singular_set,
    greedy_gcss,
    mass_threshold,
    random_baseline,
    top_k_columns,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("gls", "greedy", "random")


@dataclass
class BenchConfig:
    """Parameters of a benchmark sweep.

    ``inputs`` holds file paths, arrays (split by columns) or ready
    :class:`InstancePair` objects. ``repeats`` timing repetitions are run per
    cell and the median is reported.
    """

    inputs: list
    k_grid: tuple = (10, 50, 100)
    split_fraction: float = 0.5
    retained_energy: float = 0.75
    r_fractions: tuple = (0.1, 0.25, 0.5)
    algorithms: tuple = ALGORITHMS
    epsilon: float = 0.2
    trials: int = 100
    seed: int = 0
    center: bool = False
    output_dir: str | None = None
    repeats: int = 3
    workers: int = 1
    dry_run: bool = False
    rank_tol: float = DEFAULT_RANK_TOL
    header: bool = False
    input_format: str | None = None

    def __post_init__(self):
        for f in self.r_fractions:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"r fractions must lie in (0, 1], got {f}")
        if not 0.0 < self.retained_energy <= 1.0:
            raise ValueError(f"retained energy must lie in (0, 1], got {self.retained_energy}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def _timed(fn, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return out, float(np.median(times))


def _resolve_input(item, config: BenchConfig) -> InstancePair:
    if isinstance(item, InstancePair):
        return item
    if isinstance(item, (str, Path)):
        x = load_matrix(item, config.input_format, header=config.header)
        pair = split_columns(x, config.split_fraction, config.center)
        return InstancePair(pair.a, pair.b, {"source": str(item), **pair.metadata})
    pair = split_columns(as_matrix(item), config.split_fraction, config.center)
    return InstancePair(pair.a, pair.b, {"source": "array", **pair.metadata})


@dataclass
class _Prepared:
    index: int
    pair: InstancePair
    fac: object
    svd_ms: float
    reference: float
    retained: int
    instance_meta: dict = field(default_factory=dict)


def _prepare(index, item, config):
    pair = _resolve_input(item, config)
    a, b = as_matrix(pair.a, "a"), as_matrix(pair.b, "b")
    fac, svd_ms = _timed(lambda: svd(a, config.rank_tol), config.repeats)
    meta = {**pair.metadata, "input_index": index, "shape_a": list(a.shape),
            "shape_b": list(b.shape)}
    return _Prepared(index, InstancePair(a, b, pair.metadata), fac, svd_ms,
                     projection_energy(a, b, config.rank_tol),
                     retained_rank(fac.sigma, config.retained_energy), meta)


def _ratio(obj, ref):
    return None if ref <= 0 else obj / ref


def _gls_cell(prep: _Prepared, fraction, k, config):
    a, b, fac = prep.pair.a, prep.pair.b, prep.fac
    r_size = max(1, math.ceil(fraction * prep.retained - 1e-9))

    def run():
        r = choose_singular_set(fac, b, None, r_size, candidates=prep.retained)
        scores = generalized_leverage_scores(fac, r)
        thr, _ = mass_threshold(len(r), config.epsilon, sigma_mu(fac, r), sigma_omega(fac, r))
        return r, top_k_columns(scores, k, thr)

    (r, sel), sel_ms = _timed(run, config.repeats)
    objective = projection_energy(a[:, sel.positions], b, config.rank_tol)
    status = "ok" if sel.satisfied else "threshold-unmet"
    return RunReport(
        algorithm="gls",
        parameters={"k": k, "r_fraction": fraction, "r_size": len(r), "retained_rank": prep.retained,
                    "retained_energy": config.retained_energy, "epsilon": config.epsilon},
        instance=prep.instance_meta,
        selected=list(sel.indices),
        details={"r_set": list(r.indices)},
        objective=objective,
        objective_ratio=_ratio(objective, prep.reference),
        bounds={"leverage_mass": sel.achieved_mass, "mass_threshold": sel.threshold},
        status=status,
        timings_ms={"svd": prep.svd_ms, "selection": sel_ms, "total": prep.svd_ms + sel_ms},
    )


def _greedy_cell(prep: _Prepared, k, config):
    a, b = prep.pair.a, prep.pair.b
    res, ms = _timed(lambda: greedy_gcss(a, b, k), config.repeats)
    return RunReport(
        algorithm="greedy",
        parameters={"k": k},
        instance=prep.instance_meta,
        selected=list(res.indices),
        details={"trace": res.trace.tolist()},
        objective=res.objective,
        objective_ratio=_ratio(res.objective, prep.reference),
        status="ok" if res.complete else "stopped-early",
        timings_ms={"selection": ms, "total": ms},
    )


def _random_cell(prep: _Prepared, k, config):
    a, b = prep.pair.a, prep.pair.b
    res, ms = _timed(lambda: random_baseline(a, b, k, config.trials, config.seed,
                                             rank_tol=config.rank_tol), config.repeats)
    return RunReport(
        algorithm="random",
        parameters={"k": k, "trials": config.trials, "seed": config.seed},
        instance=prep.instance_meta,
        details={"trial_objectives": res.objectives.tolist()},
        objective=res.mean,
        objective_ratio=_ratio(res.mean, prep.reference),
        timings_ms={"selection": ms, "total": ms},
    )


def _cells(prep, config):
    n = prep.pair.a.shape[1]
    out = []
    for k in config.k_grid:
        if not 1 <= k <= n:
            out.append(("invalid", prep, k, None))
            continue
        if "gls" in config.algorithms:
            out.extend(("gls", prep, k, f) for f in config.r_fractions)
        if "greedy" in config.algorithms:
            out.append(("greedy", prep, k, None))
        if "random" in config.algorithms:
            out.append(("random", prep, k, None))
    return out


def _run_cell(cell, config):
    kind, prep, k, frac = cell
    try:
        if kind == "gls":
            return _gls_cell(prep, frac, k, config)
        if kind == "greedy":
            return _greedy_cell(prep, k, config)
        if kind == "random":
            return _random_cell(prep, k, config)
        return RunReport(algorithm="-", parameters={"k": k}, instance=prep.instance_meta,
                         status=f"error: k={k} outside 1..{prep.pair.a.shape[1]}")
    except Exception as exc:  # recorded per row; one failure must not end the sweep
        log.warning("bench cell %s k=%s failed: %s", kind, k, exc)
        return RunReport(algorithm=kind, parameters={"k": k, "r_fraction": frac},
                         instance=prep.instance_meta, status=f"error: {exc}")


def run_bench(config: BenchConfig) -> list:
    """Run every (input, algorithm, |R| fraction, k) cell and return the reports.

    The SVD of each ``A`` is computed once and shared by all of its cells.
    Cells are independent; with ``workers > 1`` they run on a thread pool and
    the returned order is the same as the serial order.
    """
    preps = [_prepare(i, item, config) for i, item in enumerate(config.inputs)]
    cells = [c for p in preps for c in _cells(p, config)]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(lambda c: _run_cell(c, config), cells))
    else:
        reports = [_run_cell(c, config) for c in cells]
    if config.dry_run:
        for r in reports:
            r.timings_ms = None
    if config.output_dir:
        out = Path(config.output_dir)
        (out / "cells").mkdir(parents=True, exist_ok=True)
        for i, r in enumerate(reports):
            k = r.parameters.get("k", "")
            write_report(r, out / "cells" / f"{i:04d}-{r.algorithm}-k{k}.json")
        write_report(reports, out / "bench.json")
        write_reports_csv(reports, out / "bench.csv")
    return reports


FIG1_COLUMNS = ("theta", "last_vector_energy", "rest_energy", "leverage_mass", "lower_bound",
                "implied_epsilon", "implied_delta")


def figure1_sweep(n: int, thetas, rank_tol: float = DEFAULT_RANK_TOL) -> list:
    """Key quantities of the adversarial instance as ``theta`` varies.

    Per ``theta``: energy of ``B`` on the last left singular vector and on the
    others, the generalized leverage mass of columns {1, 2} with respect to
    the last singular vector, and the resulting objective lower bound
    ``(1 - eps)(1 - delta) ||B||^2`` where ``delta`` and ``eps`` are the
    smallest values for which this choice passes both selection thresholds.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rows = []
    for theta in thetas:
        if not 0.0 < theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {theta}")
        inst = altschuler_instance(n, theta)
        fac = svd(inst.a, rank_tol)
        last = fac.numerical_rank
        energies = np.sum((fac.u.T @ inst.b) ** 2, axis=1)
        total = float(np.sum(inst.b**2))
        r = IndexSet((last,))
        scores = generalized_leverage_scores(fac, r)
        mass = scores.mass([1, 2])
        deficit = scores.deficit([1, 2])
        smu, sw = sigma_mu(fac, r), sigma_omega(fac, r)
        delta = max(0.0, 1.0 - float(energies[last - 1]) / total)
        eps = 0.0 if sw == 0.0 else min(1.0, math.sqrt(8.0 * sw**2 * deficit / smu**2))
        rows.append({
            "theta": float(theta),
            "last_vector_energy": float(energies[last - 1]),
            "rest_energy": float(np.sum(energies[: last - 1])),
            "leverage_mass": mass,
            "lower_bound": (1.0 - eps) * (1.0 - delta) * total,
            "implied_epsilon": eps,
            "implied_delta": delta,
        })
    return rows
