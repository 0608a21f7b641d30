"""Dense decompositions, orthonormal bases, projections and principal angles.

Matrices are plain 2-D ``float64`` numpy arrays. Every routine here is a pure
function of its inputs. Rank decisions use a single relative cutoff
(``rank_tol`` times the largest singular value) so that projectors,
pseudoinverses and bases computed from the same matrix agree with each other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, DegenerateInputWarning

DEFAULT_RANK_TOL = 1e-10


def as_matrix(x, name="matrix") -> np.ndarray:
    """Validate ``x`` and return it as a 2-D float64 array.

    A 1-D input is treated as a single column.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _check_tol(rank_tol):
    if not 0.0 < rank_tol < 1.0:
        raise ValueError(f"rank_tol must lie in (0, 1), got {rank_tol}")


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``u @ diag(sigma) @ vt`` restricted to the retained rank.

    Attributes
    ----------
    u : ndarray, shape (m, rho)
        Left singular vectors with orthonormal columns.
    sigma : ndarray, shape (rho,)
        Singular values in non-increasing order.
    vt : ndarray, shape (rho, n)
        Right singular vectors as orthonormal rows.
    numerical_rank : int
        ``rho``, the number of retained singular triplets.
    rank_tol : float
        Relative cutoff used to decide the rank.
    full_rank : int
        Numerical rank before any ``max_rank`` truncation.
    shape : tuple
        Shape of the factorized matrix.
    """

    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray
    numerical_rank: int
    rank_tol: float
    full_rank: int
    shape: tuple

    @property
    def truncated(self) -> bool:
        return self.numerical_rank < self.full_rank

    @property
    def degenerate(self) -> bool:
        return self.numerical_rank == 0

    @property
    def v(self) -> np.ndarray:
        return self.vt.T

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.vt


def svd(a, rank_tol: float = DEFAULT_RANK_TOL, max_rank: int | None = None) -> SvdFactors:
    """Thin SVD with a relative numerical-rank cutoff and optional truncation.

    Column signs are canonicalized so that the largest-magnitude entry of
    each right singular vector is positive.

    Parameters
    ----------
    a : array-like, shape (m, n)
    rank_tol : float
        Singular values ``<= rank_tol * sigma[0]`` are discarded.
    max_rank : int, optional
        Keep at most this many leading triplets.

    Returns
    -------
    SvdFactors
        For the zero matrix the factors are empty and ``degenerate`` is True.
    """
    a = as_matrix(a)
    _check_tol(rank_tol)
    if max_rank is not None and max_rank < 1:
        raise ValueError(f"max_rank must be >= 1, got {max_rank}")
    m, n = a.shape
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return SvdFactors(
            np.zeros((m, 0)), np.zeros(0), np.zeros((0, n)), 0, rank_tol, 0, (m, n)
        )
    full_rank = int(np.count_nonzero(s > rank_tol * s[0]))
    rho = full_rank if max_rank is None else min(full_rank, max_rank)
    u = u[:, :rho].copy()
    s = s[:rho].copy()
    vt = vt[:rho].copy()

    pivots = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(rho), pivots])
    signs[signs == 0] = 1.0
    u *= signs
    vt *= signs[:, None]
    return SvdFactors(u, s, vt, rho, rank_tol, full_rank, (m, n))


def orthonormal_basis(a, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``a``.

    The number of columns returned equals the numerical rank of ``a``.
    Raises :class:`DegenerateInputError` for the zero matrix.
    """
    fac = svd(a, rank_tol)
    if fac.degenerate:
        raise DegenerateInputError("zero matrix has no column-space basis")
    return fac.u


def pinv(a, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse through the SVD with the shared cutoff."""
    fac = svd(a, rank_tol)
    if fac.degenerate:
        return np.zeros(fac.shape[::-1])
    return (fac.vt.T / fac.sigma) @ fac.u.T


def projector(x, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projector ``X X^+`` onto the column space of ``x``."""
    x = as_matrix(x)
    fac = svd(x, rank_tol)
    if fac.degenerate:
        return np.zeros((x.shape[0], x.shape[0]))
    return fac.u @ fac.u.T


def projection_energy(c, b, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """``||C C^+ B||_F^2``, the energy of ``b`` captured by ``range(c)``.

    Evaluated as ``||Q^T B||_F^2`` for an orthonormal basis ``Q`` of ``c``,
    which avoids forming ``C^+``. An all-zero ``c`` spans the trivial space;
    the result is then 0 and a :class:`DegenerateInputWarning` is emitted.
    """
    c = as_matrix(c, "c")
    b = as_matrix(b, "b")
    if c.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: c has {c.shape[0]} rows, b has {b.shape[0]}")
    fac = svd(c, rank_tol)
    if fac.degenerate:
        warnings.warn("projection onto the trivial subspace", DegenerateInputWarning, stacklevel=2)
        return 0.0
    return float(np.sum((fac.u.T @ b) ** 2))


def principal_angle_cosines(f, g, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Cosines of the principal angles between ``range(f)`` and ``range(g)``.

    Returned in non-increasing order, clipped to ``[0, 1]``; there are
    ``min(rank f, rank g)`` of them.
    """
    f = as_matrix(f, "f")
    g = as_matrix(g, "g")
    if f.shape[0] != g.shape[0]:
        raise ValueError(f"row mismatch: {f.shape[0]} vs {g.shape[0]}")
    qf = orthonormal_basis(f, rank_tol)
    qg = orthonormal_basis(g, rank_tol)
    cos = np.linalg.svd(qf.T @ qg, compute_uv=False)
    return np.clip(cos, 0.0, 1.0)


def retained_rank(sigma, energy: float = 0.75) -> int:
    """Number of leading singular values whose squares reach ``energy`` of the total."""
    if not 0.0 < energy <= 1.0:
        raise ValueError(f"energy fraction must lie in (0, 1], got {energy}")
    sq = np.asarray(sigma, dtype=np.float64) ** 2
    if sq.size == 0:
        return 0
    cum = np.cumsum(sq)
    # relative slack keeps energy=1.0 from overshooting on rounding
    idx = int(np.searchsorted(cum >= energy * cum[-1] * (1 - 1e-12), True))
    return min(idx + 1, sq.size)
