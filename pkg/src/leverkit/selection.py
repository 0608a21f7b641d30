"""Column selection: leverage-score GCSS, two-sided sparse CCA, and baselines.

Column indices in results are 1-based.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import cca_bound_value, gcss_bound_value
from .exceptions import DegenerateInputError, UnsatisfiableThresholdError
from .leverage import (
    TIE_DECIMALS,
    IndexSet,
    LeverageScores,
    generalized_leverage_scores,
    sigma_mu as _sigma_mu,
    sigma_omega as _sigma_omega,
)
from .linalg import (
    DEFAULT_RANK_TOL,
    SvdFactors,
    as_matrix,
    orthonormal_basis,
    projection_energy,
    retained_rank,
    svd,
)

# mass slack used when sigma_omega = 0 and the target is the full |R|
FULL_MASS_TOL = 1e-9
MASS_TOL = 1e-12


@dataclass(frozen=True)
class ColumnSelection:
    """Ordered, distinct 1-based column indices and the leverage mass they reach."""

    indices: tuple
    achieved_mass: float
    threshold: float | None
    satisfied: bool = True

    @property
    def positions(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class GcssResult:
    selection: ColumnSelection
    r_set: IndexSet
    sigma_mu: float
    sigma_omega: float
    objective: float
    bound: float
    target_energy: float
    sigma_omega_mode: str = "proof"

    @property
    def satisfied(self) -> bool:
        """Both internal thresholds met, so the objective bound is claimed."""
        return self.r_set.target_met and self.selection.satisfied


@dataclass(frozen=True)
class CcaResult:
    s_a: ColumnSelection
    s_b: ColumnSelection
    r_set: IndexSet
    t_set: IndexSet
    q: float
    q_prime: float
    achieved: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return (self.r_set.target_met and self.s_a.satisfied
                and self.t_set.target_met and self.s_b.satisfied)


@dataclass(frozen=True)
class GreedyResult:
    indices: tuple
    trace: np.ndarray
    complete: bool = True

    @property
    def objective(self) -> float:
        return float(self.trace[-1]) if self.trace.size else 0.0

    @property
    def positions(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1


@dataclass(frozen=True)
class RandomBaselineResult:
    mean: float
    objectives: np.ndarray
    selections: tuple


def _check_open_unit(x, name):
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")


def choose_singular_set(fac_a: SvdFactors, b, delta: float | None = None,
                        size_cap: int | None = None, *, total: float | None = None,
                        candidates: int | None = None, tol: float = MASS_TOL) -> IndexSet:
    """Pick singular directions of ``A`` that capture the energy of ``b``.

    Directions are ranked by ``||u_i^T B||^2`` (ties by lower index). Without
    ``size_cap`` the shortest ranked prefix reaching ``(1 - delta) * total``
    is returned, where ``total`` defaults to ``||B||_F^2``. With ``size_cap``
    the top ``size_cap`` directions are returned regardless of ``delta``.
    ``candidates`` restricts the ranking to the leading singular vectors.

    If the target is out of reach the whole candidate set is returned with
    ``target_met=False``.
    """
    b = as_matrix(b, "b")
    if b.shape[0] != fac_a.shape[0]:
        raise ValueError(f"b has {b.shape[0]} rows, A has {fac_a.shape[0]}")
    if fac_a.degenerate:
        raise DegenerateInputError("A is the zero matrix")
    if total is None:
        total = float(np.sum(b * b))
        if total == 0.0:
            raise DegenerateInputError("b is the zero matrix")
    ncand = fac_a.numerical_rank if candidates is None else min(candidates, fac_a.numerical_rank)
    energies = np.sum((fac_a.u[:, :ncand].T @ b) ** 2, axis=1)
    # relative 12-decimal ties go to the lower index, as for leverage scores
    scale = total if total > 0 else 1.0
    order = np.argsort(-np.round(energies / scale, TIE_DECIMALS), kind="stable")
    cum = np.cumsum(energies[order])
    slack = tol * max(1.0, total)

    if size_cap is not None:
        if size_cap < 1:
            raise ValueError(f"size_cap must be >= 1, got {size_cap}")
        take = min(size_cap, ncand)
        met = True
        if delta is not None:
            met = bool(cum[take - 1] >= (1.0 - delta) * total - slack)
        return IndexSet.of(order[:take] + 1, met)

    _check_open_unit(delta, "delta")
    target = (1.0 - delta) * total
    hits = np.flatnonzero(cum >= target - slack)
    if hits.size == 0:
        return IndexSet.of(order + 1, False)
    return IndexSet.of(order[: hits[0] + 1] + 1, True)


def select_columns_to_mass(scores: LeverageScores, threshold: float,
                           tol: float = MASS_TOL) -> ColumnSelection:
    """Take columns in decreasing score order until their mass reaches ``threshold``.

    Ties go to the lower column index. At least one column is always taken.
    Raises :class:`UnsatisfiableThresholdError` when the threshold exceeds the
    total mass.
    """
    total = scores.total
    if threshold > total + MASS_TOL:
        raise UnsatisfiableThresholdError(threshold, total)
    order = scores.order()
    cum = np.cumsum(scores.scores[order])
    hits = np.flatnonzero(cum >= threshold - tol)
    end = int(hits[0]) + 1 if hits.size else order.size
    end = max(end, 1)
    picked = order[:end]
    return ColumnSelection(tuple(int(p) + 1 for p in picked), float(cum[end - 1]),
                           float(threshold), bool(hits.size))


def top_k_columns(scores: LeverageScores, k: int, threshold: float | None = None) -> ColumnSelection:
    """The ``k`` highest-scoring columns. ``satisfied`` compares their mass to ``threshold``."""
    if not 1 <= k <= scores.scores.size:
        raise ValueError(f"k must lie in 1..{scores.scores.size}, got {k}")
    picked = scores.order()[:k]
    mass = float(np.sum(scores.scores[picked]))
    thr = None if threshold is None else float(threshold)
    ok = True if threshold is None else mass >= threshold - MASS_TOL
    return ColumnSelection(tuple(int(p) + 1 for p in picked), mass, thr, ok)


def mass_threshold(r_size: int, epsilon: float, sigma_mu: float, sigma_omega: float):
    """``|R| - epsilon^2 sigma_mu^2 / (8 sigma_omega^2)`` and the slack to compare it with.

    With ``sigma_omega == 0`` the target is the full mass ``|R|``.
    """
    if sigma_omega == 0.0:
        return float(r_size), FULL_MASS_TOL
    return r_size - epsilon**2 * sigma_mu**2 / (8.0 * sigma_omega**2), MASS_TOL


def _leverage_select(fac, target_b, delta, epsilon, *, total=None, size_cap=None,
                     candidates=None, sigma_omega_mode="proof"):
    r = choose_singular_set(fac, target_b, delta, size_cap, total=total, candidates=candidates)
    scores = generalized_leverage_scores(fac, r)
    smu = _sigma_mu(fac, r)
    sw = _sigma_omega(fac, r, sigma_omega_mode)
    threshold, tol = mass_threshold(len(r), epsilon, smu, sw)
    try:
        sel = select_columns_to_mass(scores, threshold, tol)
    except UnsatisfiableThresholdError:
        order = scores.order()
        sel = ColumnSelection(tuple(int(p) + 1 for p in order), scores.total, threshold, False)
    return r, sel, smu, sw


def gcss(a, b, epsilon: float, delta: float, r_size_cap: int | None = None, *,
         retained_energy: float = 0.75, sigma_omega_mode: str = "proof",
         rank_tol: float = DEFAULT_RANK_TOL, fac: SvdFactors | None = None) -> GcssResult:
    """Deterministic generalized-leverage-score selection of columns of ``a`` for target ``b``.

    Chooses singular directions ``R`` capturing ``(1 - delta) ||B||_F^2``,
    then takes columns by generalized leverage score until their mass is at
    least ``|R| - epsilon^2 sigma_mu^2 / (8 sigma_omega^2)``. When both steps
    succeed, ``||C C^+ B||_F^2 >= (1 - epsilon)(1 - delta) ||B||_F^2`` is
    claimed and reported as ``bound``.

    Passing ``r_size_cap`` switches to the experimental variant: candidate
    directions are limited to the leading singular values holding
    ``retained_energy`` of ``||A||_F^2`` and ``|R|`` is fixed to the cap.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}")
    _check_open_unit(epsilon, "epsilon")
    _check_open_unit(delta, "delta")
    if fac is None:
        fac = svd(a, rank_tol)
    if fac.degenerate:
        raise DegenerateInputError("a is the zero matrix")
    candidates = None
    if r_size_cap is not None:
        candidates = retained_rank(fac.sigma, retained_energy)
    r, sel, smu, sw = _leverage_select(fac, b, delta, epsilon, size_cap=r_size_cap,
                                       candidates=candidates, sigma_omega_mode=sigma_omega_mode)
    objective = projection_energy(a[:, sel.positions], b, rank_tol)
    total = float(np.sum(b * b))
    return GcssResult(sel, r, smu, sw, objective, gcss_bound_value(epsilon, delta, b),
                      (1.0 - delta) * total, sigma_omega_mode)


def sparse_cca(a, b, epsilon: float, delta: float, *, sigma_omega_mode: str = "proof",
               rank_tol: float = DEFAULT_RANK_TOL) -> CcaResult:
    """Two-sided leverage selection preserving the summed squared canonical correlations.

    Columns ``S`` of ``a`` are chosen against an orthonormal basis of ``b``,
    then columns ``S'`` of ``b`` against an orthonormal basis of ``a[:, S]``.
    Rows are used as given; center them beforehand for CCA semantics.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}")
    _check_open_unit(epsilon, "epsilon")
    _check_open_unit(delta, "delta")
    q_a = orthonormal_basis(a, rank_tol)
    q_b = orthonormal_basis(b, rank_tol)
    q = float(np.sum((q_a.T @ q_b) ** 2))

    fac_a = svd(a, rank_tol)
    r, s_a, _, _ = _leverage_select(fac_a, q_b, delta, epsilon, total=q,
                                    sigma_omega_mode=sigma_omega_mode)

    fac_b = svd(b, rank_tol)
    q_as = orthonormal_basis(a[:, s_a.positions], rank_tol)
    q_prime = float(np.sum((q_as.T @ q_b) ** 2))
    t, s_b, _, _ = _leverage_select(fac_b, q_as, delta, epsilon, total=q_prime,
                                    sigma_omega_mode=sigma_omega_mode)

    w_b = orthonormal_basis(b[:, s_b.positions], rank_tol)
    achieved = float(np.sum((q_as.T @ w_b) ** 2))
    return CcaResult(s_a, s_b, r, t, q, q_prime, achieved, cca_bound_value(epsilon, delta, q))


def greedy_gcss(a, b, k: int, *, reorth_every: int = 50, gain_tol: float = 1e-12,
                residual_tol: float = 1e-12) -> GreedyResult:
    """Greedy forward selection maximizing ``||C C^+ B||_F^2`` one column at a time.

    Keeps the residuals of ``A`` and ``B`` against the current basis and the
    cross products ``A_res^T B_res``, so each step is a rank-one update
    costing ``O(mn + mp + np)``. Residuals are recomputed from scratch every
    ``reorth_every`` picks. Stops early (``complete=False``) when no remaining
    column adds energy.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}")
    n = a.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    total_b = float(np.sum(b * b))
    col_norm2 = np.sum(a * a, axis=0)
    available = col_norm2 > 0
    res = a.copy()
    e = b.copy()
    cross = res.T @ e
    g = col_norm2.copy()
    basis = []
    picks = []
    trace = []
    obj = 0.0
    complete = True

    for it in range(k):
        if it and it % reorth_every == 0:
            q, _ = np.linalg.qr(np.column_stack(basis))
            res = a - q @ (q.T @ a)
            e = b - q @ (q.T @ b)
            cross = res.T @ e
            g = np.sum(res * res, axis=0)
            obj = float(np.sum((q.T @ b) ** 2))
        valid = available & (g > residual_tol * col_norm2)
        if not valid.any():
            complete = False
            break
        gains = np.full(n, -np.inf)
        gains[valid] = np.sum(cross[valid] ** 2, axis=1) / g[valid]
        best = gains.max()
        if best <= gain_tol * total_b:
            complete = False
            break
        j = int(np.flatnonzero(gains >= best * (1.0 - 1e-12))[0])

        w = res[:, j] / np.sqrt(g[j])
        wa = w @ res
        we = w @ e
        res -= np.outer(w, wa)
        e -= np.outer(w, we)
        cross -= np.outer(wa, we)
        g -= wa**2
        available[j] = False
        basis.append(w)
        # accumulated rounding must not push the energy past ||B||^2
        obj = min(obj + float(we @ we), total_b)
        picks.append(j + 1)
        trace.append(obj)
    return GreedyResult(tuple(picks), np.asarray(trace, dtype=np.float64), complete)


GENERATOR_NAME = "pcg64-seedseq/fisher-yates-v1"


def _trial_generator(seed: int, trial: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence([int(seed), int(trial)]))


def _uniform_below(bitgen: np.random.PCG64, bound: int) -> int:
    # rejection sampling on raw 64-bit output; independent of numpy's Generator algorithms
    limit = (1 << 64) - ((1 << 64) % bound)
    while True:
        x = int(bitgen.random_raw())
        if x < limit:
            return x % bound


def sample_columns(n: int, k: int, seed: int, trial: int) -> tuple:
    """``k`` distinct 1-based column indices drawn uniformly, sorted.

    Partial Fisher-Yates shuffle driven by raw PCG64 words seeded from
    ``SeedSequence([seed, trial])``, so draws are stable across platforms and
    numpy versions.
    """
    bitgen = _trial_generator(seed, trial)
    perm = list(range(n))
    for i in range(k):
        j = i + _uniform_below(bitgen, n - i)
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(sorted(p + 1 for p in perm[:k]))


def random_baseline(a, b, k: int, trials: int = 100, seed: int = 0, *,
                    workers: int | None = None,
                    rank_tol: float = DEFAULT_RANK_TOL) -> RandomBaselineResult:
    """Objective of ``k`` uniformly random columns, over ``trials`` independent draws.

    Trial ``t`` depends only on ``(seed, t)``, so any ``workers`` count gives
    identical output.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    n = a.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def run(t):
        cols = sample_columns(n, k, seed, t)
        pos = np.asarray(cols, dtype=np.intp) - 1
        if not np.any(a[:, pos]):
            return cols, 0.0
        return cols, projection_energy(a[:, pos], b, rank_tol)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(run, range(trials)))
    else:
        out = [run(t) for t in range(trials)]
    objectives = np.array([o for _, o in out], dtype=np.float64)
    return RandomBaselineResult(float(np.mean(objectives)), objectives, tuple(c for c, _ in out))
