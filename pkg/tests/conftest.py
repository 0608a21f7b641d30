"""Independent oracles shared by the test modules.

They recompute quantities from scratch with different numerical routes
(scipy's gesvd driver, least squares, Householder QR) than the package.
"""

import sys

import numpy as np
import pytest
import scipy.linalg as sla


def oracle_projection_energy(c, b):
    """||C C^+ B||_F^2 via least squares on C."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.ndim == 2 and c.shape[0] == 1:
        c = c.T
    b = np.asarray(b, dtype=float).reshape(c.shape[0], -1)
    coef, *_ = np.linalg.lstsq(c, b, rcond=None)
    return float(np.sum((c @ coef) ** 2))


def oracle_right_vectors(a, tol=1e-10):
    """Right singular vectors (n x rank) from scipy's gesvd driver."""
    _, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return vt[:rank].T, s[:rank]


def oracle_left_vectors(a, tol=1e-10):
    u, s, _ = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return u[:, :rank], s[:rank]


def oracle_gls(a, r):
    """Generalized leverage scores ||(V_R)_i||^2 with 1-based R."""
    v, _ = oracle_right_vectors(a)
    vr = v[:, [i - 1 for i in r]]
    return np.sum(vr**2, axis=1)


def oracle_statistical_leverages(x):
    """diag(X (X^T X)^{-1} X^T) for full-column-rank X, via Householder QR."""
    q, _ = np.linalg.qr(x)
    return np.sum(q**2, axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
