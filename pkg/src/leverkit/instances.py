"""Synthetic instances: the adversarial greedy example, power-law leverage decay, random low rank.

Every generator is a pure function of its arguments (including ``seed``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import LeverkitError
from .linalg import orthonormal_basis, svd
from .leverage import rank_k_scores


@dataclass(frozen=True)
class InstancePair:
    a: np.ndarray
    b: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PowerLawInstance:
    """Matrix whose rank-k leverage scores follow a prescribed power-law decay."""

    a: np.ndarray
    target_scores: np.ndarray
    achieved_scores: np.ndarray
    sigma: np.ndarray
    metadata: dict = field(default_factory=dict)


def altschuler_instance(n: int, theta: float) -> InstancePair:
    """Square ``(n+1) x (n+1)`` instance on which greedy selection is misled.

    With basis vectors ``e_0..e_n`` (``e_0`` is row 1), the columns are
    ``e_1``, ``theta e_0 + e_1`` and ``2 theta e_0 + e_j`` for ``j = 2..n``;
    the target is ``B = e_0``. The first two columns span ``e_0`` exactly, but
    each later column individually correlates better with it.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    a = np.zeros((n + 1, n + 1))
    a[1, 0] = 1.0
    a[0, 1] = theta
    a[1, 1] = 1.0
    for j in range(2, n + 1):
        a[0, j] = 2.0 * theta
        a[j, j] = 1.0
    b = np.zeros((n + 1, 1))
    b[0, 0] = 1.0
    return InstancePair(a, b, {"generator": "altschuler", "n": n, "theta": theta})


def powerlaw_targets(n: int, k: int, eta: float, cap: bool = False) -> np.ndarray:
    """Leverage targets proportional to ``1 / i^(1 + eta)`` summing to ``k``.

    Leverage scores cannot exceed 1, so the pure decay is only feasible when
    ``k / sum_i i^-(1+eta) <= 1``. With ``cap=True`` the scores are
    ``min(1, c / i^(1 + eta))`` with ``c`` solved for, which is feasible for
    every ``k < n``.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    base = np.arange(1, n + 1, dtype=np.float64) ** -(1.0 + eta)
    if k == n:
        return np.ones(n)
    if not cap:
        t = k * base / base.sum()
        if t[0] > 1.0 + 1e-12:
            raise ValueError(
                f"pure power-law decay with eta={eta} is infeasible for n={n}, k={k}: "
                f"the leading score would be {t[0]:.4g} > 1 (scores must lie in [0, 1] "
                f"and sum to k); pass cap=True for the capped decay"
            )
        return t
    c = brentq(lambda c: np.minimum(1.0, c * base).sum() - k, 1e-12, 1e12 * n, xtol=1e-14)
    return np.minimum(1.0, c * base)


def _frame_with_row_norms(target: np.ndarray, k: int, rng, iters: int, rtol: float):
    n = target.size
    v, _ = np.linalg.qr(rng.standard_normal((n, k)))
    err = np.inf
    for _ in range(iters):
        cur = np.sum(v * v, axis=1)
        err = float(np.max(np.abs(cur - target) / target))
        if err <= rtol * 1e-2:
            break
        v = v * np.sqrt(target / np.maximum(cur, 1e-300))[:, None]
        p, _, qt = np.linalg.svd(v, full_matrices=False)
        v = p @ qt
    cur = np.sum(v * v, axis=1)
    return v, float(np.max(np.abs(cur - target) / target))


def powerlaw_instance(m: int, n: int, k: int, eta: float, seed: int, *, cap: bool = False,
                      sigma=None, iters: int = 200, rtol: float = 0.05) -> PowerLawInstance:
    """Random ``m x n`` matrix whose rank-k leverage scores decay like ``1 / i^(1 + eta)``.

    The top-k right singular frame is obtained by alternating row rescaling
    and re-orthonormalization (polar factor) of a random orthonormal frame.
    Singular values default to ``1 / i``.
    """
    if not 1 <= k <= min(m, n):
        raise ValueError(f"need 1 <= k <= min(m, n), got k={k}, m={m}, n={n}")
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    rng = np.random.default_rng(seed)
    target = powerlaw_targets(n, k, eta, cap)
    vk, err = _frame_with_row_norms(target, k, rng, iters, rtol)
    if err > rtol:
        raise LeverkitError(f"leverage targets not reached: max relative error {err:.3g} > {rtol}")

    r = min(m, n)
    if sigma is None:
        sigma = 1.0 / np.arange(1, r + 1, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (r,) or np.any(np.diff(sigma) > 0) or sigma[-1] <= 0:
        raise ValueError(f"sigma must be {r} positive non-increasing values")
    if r > k and not sigma[k - 1] > sigma[k]:
        raise ValueError("sigma must have a gap after position k")

    rest = rng.standard_normal((n, r - k))
    rest -= vk @ (vk.T @ rest)
    v = np.column_stack([vk, orthonormal_basis(rest)]) if r > k else vk
    u, _ = np.linalg.qr(rng.standard_normal((m, r)))
    a = (u * sigma) @ v.T

    achieved = rank_k_scores(svd(a), k).scores
    meta = {"generator": "powerlaw", "m": m, "n": n, "k": k, "eta": eta, "seed": seed,
            "cap": cap, "max_relative_error": float(np.max(np.abs(achieved - target) / target))}
    return PowerLawInstance(a, target, achieved, sigma, meta)


def random_lowrank_instance(m: int, n: int, rank: int, noise: float, seed: int, *,
                            p: int = 3, out_of_range: float = 0.0) -> InstancePair:
    """Gaussian rank-``rank`` matrix plus ``noise`` times a Gaussian perturbation.

    ``B`` is a random combination of the columns of ``A`` plus
    ``out_of_range`` times a Gaussian block projected off ``range(A)``.
    """
    if not 1 <= rank <= min(m, n):
        raise ValueError(f"rank must lie in 1..{min(m, n)}, got {rank}")
    if noise < 0 or out_of_range < 0:
        raise ValueError("noise and out_of_range must be non-negative")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))
    a = a + noise * rng.standard_normal((m, n))
    b = a @ rng.standard_normal((n, p))
    extra = rng.standard_normal((m, p))
    if out_of_range > 0:
        q = orthonormal_basis(a)
        extra -= q @ (q.T @ extra)
        b = b + out_of_range * extra
    meta = {"generator": "random_lowrank", "m": m, "n": n, "rank": rank, "noise": noise,
            "seed": seed, "p": p, "out_of_range": out_of_range}
    return InstancePair(a, b, meta)
