"""Leverage scores with respect to arbitrary singular-vector subsets.

All user-facing indices (singular-vector indices, column indices, row
indices) are 1-based. ``.positions`` on the index containers gives the
0-based numpy view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, InvalidIndexError, SingularUpdateError
from .linalg import DEFAULT_RANK_TOL, SvdFactors, as_matrix, svd

TIE_DECIMALS = 12


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing set of 1-based singular-vector indices.

    ``target_met`` is False when a selection step could not reach the
    energy target it was asked for and returned its best effort instead.
    """

    indices: tuple
    target_met: bool = True

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 1 for i in idx):
            raise InvalidIndexError(f"indices are 1-based, got {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidIndexError(f"indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices, target_met=True) -> "IndexSet":
        return cls(tuple(sorted(set(int(i) for i in indices))), target_met)

    @classmethod
    def prefix(cls, k: int) -> "IndexSet":
        return cls(tuple(range(1, k + 1)))

    @property
    def positions(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    @property
    def max(self) -> int:
        return self.indices[-1] if self.indices else 0

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices


@dataclass(frozen=True)
class LeverageScores:
    """One score per column of the source matrix, relative to ``source_set``."""

    scores: np.ndarray
    source_set: IndexSet

    @property
    def total(self) -> float:
        return float(np.sum(self.scores))

    def order(self) -> np.ndarray:
        """0-based column positions sorted by score, descending, ties by lower index.

        Scores equal to 12 decimals count as tied, so rounding noise between
        mathematically equal scores does not decide the order.
        """
        return np.argsort(-np.round(self.scores, TIE_DECIMALS), kind="stable")

    def mass(self, columns) -> float:
        """Total score of the given 1-based columns."""
        pos = np.asarray(list(columns), dtype=np.intp) - 1
        return float(np.sum(self.scores[pos])) if pos.size else 0.0

    def deficit(self, columns) -> float:
        """``|R|`` minus the mass of ``columns``, computed from the unselected scores.

        Summing the complement keeps the result non-negative and avoids the
        cancellation in ``|R| - mass``.
        """
        keep = np.ones(self.scores.size, dtype=bool)
        pos = np.asarray(list(columns), dtype=np.intp) - 1
        keep[pos] = False
        return float(np.sum(self.scores[keep]))


@dataclass(frozen=True)
class StatisticalLeverages:
    """Diagonal of the projector ``X X^+``, one value per row of ``X``."""

    values: np.ndarray
    rank: int

    @property
    def total(self) -> float:
        return float(np.sum(self.values))


def _validate_r(fac: SvdFactors, r: IndexSet):
    if len(r) == 0:
        raise InvalidIndexError("index set is empty")
    if r.max > fac.numerical_rank:
        raise InvalidIndexError(
            f"index {r.max} exceeds numerical rank {fac.numerical_rank}; "
            "singular vectors in the nullspace carry no leverage"
        )


def generalized_leverage_scores(fac: SvdFactors, r) -> LeverageScores:
    """Squared row norms of ``V_R``, one per column of the factorized matrix.

    ``r`` is an :class:`IndexSet` or any iterable of 1-based indices; the
    standard rank-k scores are ``r = IndexSet.prefix(k)``.
    """
    if not isinstance(r, IndexSet):
        r = IndexSet.of(r)
    _validate_r(fac, r)
    vr = fac.vt[r.positions]
    return LeverageScores(np.sum(vr**2, axis=0), r)


def rank_k_scores(fac: SvdFactors, k: int) -> LeverageScores:
    return generalized_leverage_scores(fac, IndexSet.prefix(k))


def sigma_mu(fac: SvdFactors, r: IndexSet) -> float:
    """Smallest singular value indexed by ``r``."""
    _validate_r(fac, r)
    return float(np.min(fac.sigma[r.positions]))


def sigma_omega(fac: SvdFactors, r: IndexSet, mode: str = "proof") -> float:
    """Largest singular value outside ``r``.

    ``mode="proof"`` only looks below ``max(r)``, i.e. over
    ``M = {i < max(r), i not in r}`` and returns 0 when ``M`` is empty.
    ``mode="statement"`` looks at every retained index not in ``r``.
    The proof value never exceeds the statement value.
    """
    _validate_r(fac, r)
    if mode == "proof":
        limit = r.max - 1
    elif mode == "statement":
        limit = fac.numerical_rank
    else:
        raise ValueError(f"unknown sigma_omega mode {mode!r}")
    outside = np.ones(limit, dtype=bool)
    outside[r.positions[r.positions < limit]] = False
    vals = fac.sigma[:limit][outside]
    return float(np.max(vals)) if vals.size else 0.0


def statistical_leverages(x, rank_tol: float = DEFAULT_RANK_TOL) -> StatisticalLeverages:
    """Diagonal entries of ``X X^+`` via an orthonormal basis of ``x``."""
    x = as_matrix(x, "x")
    fac = svd(x, rank_tol)
    if fac.degenerate:
        return StatisticalLeverages(np.zeros(x.shape[0]), 0)
    return StatisticalLeverages(np.sum(fac.u**2, axis=1), fac.numerical_rank)


def scaled_leverage_update(x, i: int, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> StatisticalLeverages:
    """Leverages of ``x`` after multiplying its row ``i`` (1-based) by ``alpha``.

    Uses the closed-form rank-one update

        l_i' = alpha^2 l_i / (1 + (alpha^2 - 1) l_i)
        l_j' = l_j - (alpha^2 - 1) h_ji^2 / (1 + (alpha^2 - 1) l_i),  j != i

    where ``h_ji = x_j^T (X^T X)^{-1} x_i`` is an entry of the projector,
    so nothing is re-factorized after the scaling.

    Raises
    ------
    DegenerateInputError
        If ``x`` is not of full column rank.
    SingularUpdateError
        If the denominator is below 1e-12 in magnitude (the scaling drops rank).
    """
    x = as_matrix(x, "x")
    n, k = x.shape
    if not 1 <= i <= n:
        raise InvalidIndexError(f"row index {i} outside 1..{n}")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    fac = svd(x, rank_tol)
    if fac.numerical_rank != k:
        raise DegenerateInputError(f"x must have full column rank {k}, got {fac.numerical_rank}")
    # X (X^T X)^{-1} X^T = Y Y^T for the orthonormal left factor Y
    y = fac.u
    row = i - 1
    h = y @ y[row]
    lev = np.sum(y**2, axis=1)
    a2m1 = alpha * alpha - 1.0
    denom = 1.0 + a2m1 * lev[row]
    if abs(denom) < 1e-12:
        raise SingularUpdateError(
            f"scaling row {i} by {alpha} drops rank (denominator {denom:.3g})"
        )
    out = lev - a2m1 * h**2 / denom
    out[row] = alpha * alpha * lev[row] / denom
    return StatisticalLeverages(out, k)
