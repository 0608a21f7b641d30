"""Checkers for the leverage/angle inequalities and the closed-form bound values.

Each ``verify_*`` function evaluates both sides of an inequality on a
concrete instance and returns a :class:`BoundReport`. Nothing here asserts;
callers decide what to do with a violated report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateInputError, InvalidIndexError
from .leverage import (
    IndexSet,
    generalized_leverage_scores,
    rank_k_scores,
    sigma_mu as _sigma_mu,
    sigma_omega as _sigma_omega,
)
from .linalg import DEFAULT_RANK_TOL, SvdFactors, as_matrix, projection_energy, svd

DEFAULT_BOUND_TOL = 1e-8


@dataclass(frozen=True)
class BoundReport:
    """Both sides of an inequality ``lhs >= rhs`` evaluated on one instance."""

    lhs: float
    rhs: float
    tol: float = DEFAULT_BOUND_TOL
    label: str = ""
    context: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def satisfied(self) -> bool:
        return self.slack >= -self.tol

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tol": self.tol,
            "satisfied": self.satisfied,
            "context": dict(self.context),
        }


@dataclass(frozen=True)
class GeneralBoundReport:
    """Arbitrary-subset bound under both sigma_omega conventions.

    ``epsilon_form`` is only populated when an ``epsilon`` was supplied and the
    leverage-mass premise holds for it.
    """

    proof_mode: BoundReport
    statement_mode: BoundReport
    epsilon_form: BoundReport | None = None
    premise_holds: bool | None = None

    @property
    def satisfied(self) -> bool:
        ok = self.proof_mode.satisfied and self.statement_mode.satisfied
        if self.epsilon_form is not None:
            ok = ok and self.epsilon_form.satisfied
        return ok

    def to_dict(self) -> dict:
        return {
            "proof_mode": self.proof_mode.to_dict(),
            "statement_mode": self.statement_mode.to_dict(),
            "epsilon_form": None if self.epsilon_form is None else self.epsilon_form.to_dict(),
            "premise_holds": self.premise_holds,
            "satisfied": self.satisfied,
        }


def column_positions(s, n_cols: int) -> np.ndarray:
    """0-based positions for a selection given as 1-based indices or an object with ``.indices``."""
    idx = getattr(s, "indices", s)
    pos = np.asarray(list(idx), dtype=np.intp) - 1
    if pos.size == 0:
        raise InvalidIndexError("column selection is empty")
    if pos.min() < 0 or pos.max() >= n_cols:
        raise InvalidIndexError(f"column indices must lie in 1..{n_cols}")
    if np.unique(pos).size != pos.size:
        raise InvalidIndexError("column indices must be distinct")
    return pos


def _factor(a, fac, rank_tol):
    a = as_matrix(a, "a")
    if fac is None:
        fac = svd(a, rank_tol)
    if fac.degenerate:
        raise DegenerateInputError("a is the zero matrix")
    return a, fac


def verify_topk_bound(a, s, k: int, *, fac: SvdFactors | None = None,
                      tol: float = DEFAULT_BOUND_TOL,
                      rank_tol: float = DEFAULT_RANK_TOL) -> BoundReport:
    """``||C C^+ U_k||_F^2 >= ||V_k^T S||_F^2`` for ``C = A S``.

    The right side is the summed rank-k leverage score of the selected columns.
    """
    a, fac = _factor(a, fac, rank_tol)
    if not 1 <= k <= fac.numerical_rank:
        raise InvalidIndexError(f"k={k} outside 1..{fac.numerical_rank}")
    pos = column_positions(s, a.shape[1])
    lhs = projection_energy(a[:, pos], fac.u[:, :k], rank_tol)
    rhs = float(np.sum(rank_k_scores(fac, k).scores[pos]))
    return BoundReport(lhs, rhs, tol, "top-k angles vs leverage",
                       {"k": k, "columns": [int(p) + 1 for p in pos]})


def verify_general_bound(a, s, r, epsilon: float | None = None, *,
                         fac: SvdFactors | None = None,
                         tol: float = DEFAULT_BOUND_TOL,
                         rank_tol: float = DEFAULT_RANK_TOL) -> GeneralBoundReport:
    """Angle bound for an arbitrary singular index set ``r``.

    Checks
    ``||C C^+ U_R||^2 >= m - (sigma_omega / sigma_mu)^2 (|R| - m)`` with
    ``m = ||V_R^T S||_F^2`` under both sigma_omega conventions. With
    ``epsilon`` given and ``|R| - m <= epsilon sigma_mu^2 / (2 sigma_omega^2)``
    (proof convention), also checks ``||C C^+ U_R||^2 >= m - epsilon``.
    """
    a, fac = _factor(a, fac, rank_tol)
    if not isinstance(r, IndexSet):
        r = IndexSet.of(r)
    pos = column_positions(s, a.shape[1])
    scores = generalized_leverage_scores(fac, r)
    lhs = projection_energy(a[:, pos], fac.u[:, r.positions], rank_tol)
    cols = [int(p) + 1 for p in pos]
    mass = scores.mass(cols)
    deficit = scores.deficit(cols)
    smu = _sigma_mu(fac, r)
    sw_proof = _sigma_omega(fac, r, "proof")
    sw_stmt = _sigma_omega(fac, r, "statement")
    ctx = {"r": list(r.indices), "columns": cols, "sigma_mu": smu, "mass": mass, "deficit": deficit}

    def angle_report(sw, mode):
        rhs = mass - (sw / smu) ** 2 * deficit
        return BoundReport(lhs, rhs, tol, f"arbitrary-subset angle bound ({mode})",
                           {**ctx, "sigma_omega": sw, "sigma_omega_mode": mode})

    eps_form = None
    premise = None
    if epsilon is not None:
        premise = sw_proof == 0.0 or deficit <= epsilon * smu**2 / (2 * sw_proof**2)
        if premise:
            eps_form = BoundReport(lhs, mass - epsilon, tol, "epsilon angle bound",
                               {**ctx, "sigma_omega": sw_proof, "epsilon": epsilon})
    return GeneralBoundReport(angle_report(sw_proof, "proof"), angle_report(sw_stmt, "statement"), eps_form, premise)


def gcss_bound_value(epsilon: float, delta: float, b) -> float:
    """``(1 - epsilon)(1 - delta) ||B||_F^2``."""
    _check_unit(epsilon, "epsilon")
    _check_unit(delta, "delta")
    b = as_matrix(b, "b")
    return (1.0 - epsilon) * (1.0 - delta) * float(np.sum(b * b))


def cca_bound_value(epsilon: float, delta: float, q: float) -> float:
    """``(1 - epsilon)^2 (1 - delta)^2 q``."""
    _check_unit(epsilon, "epsilon")
    _check_unit(delta, "delta")
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    return (1.0 - epsilon) ** 2 * (1.0 - delta) ** 2 * q


def _check_unit(x, name):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def powerlaw_column_count(k: int, epsilon: float, eta: float,
                          sigma_omega: float, sigma_mu: float) -> int:
    """Columns sufficient for a mass of ``k - epsilon sigma_mu^2 / (2 sigma_omega^2)``.

    Valid when the sorted scores decay as ``l_i = l_1 / i^(1 + eta)``. With
    ``x = 4 k sigma_omega^2 / (epsilon sigma_mu^2)`` the count is
    ``max(x^(1/(1+eta)) - 1, (x/eta)^(1/eta) - 1)``, rounded up and clamped
    to at least 1.
    """
    if sigma_mu <= 0:
        raise ValueError("sigma_mu must be positive")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    x = 4.0 * k * sigma_omega**2 / (epsilon * sigma_mu**2)
    if x == 0.0:
        return 1
    c = max(x ** (1.0 / (1.0 + eta)) - 1.0, (x / eta) ** (1.0 / eta) - 1.0)
    # round first so exact integers are not bumped up by pow() rounding
    return max(1, math.ceil(round(c, 9)))


def condition_ratio(fac: SvdFactors) -> float:
    """``sigma_1 / sigma_rho``; the loosest admissible stand-in for sigma_omega / sigma_mu."""
    if fac.degenerate:
        raise DegenerateInputError("zero matrix has no condition number")
    return float(fac.sigma[0] / fac.sigma[-1])


def verify_gcss_bound(a, b, s, epsilon: float, delta: float, *,
                      tol: float = DEFAULT_BOUND_TOL,
                      rank_tol: float = DEFAULT_RANK_TOL) -> BoundReport:
    """``||C C^+ B||_F^2 >= (1 - epsilon)(1 - delta) ||B||_F^2`` for ``C = A S``."""
    a = as_matrix(a, "a")
    pos = column_positions(s, a.shape[1])
    lhs = projection_energy(a[:, pos], b, rank_tol)
    rhs = gcss_bound_value(epsilon, delta, b)
    return BoundReport(lhs, rhs, tol, "gcss objective bound",
                       {"epsilon": epsilon, "delta": delta, "columns": [int(p) + 1 for p in pos]})


def verify_cca_bound(achieved: float, q: float, epsilon: float, delta: float,
                     tol: float = DEFAULT_BOUND_TOL) -> BoundReport:
    """``||W^T W'||_F^2 >= (1 - epsilon)^2 (1 - delta)^2 q``."""
    return BoundReport(float(achieved), cca_bound_value(epsilon, delta, q), tol,
                       "sparse cca bound", {"epsilon": epsilon, "delta": delta, "q": q})
