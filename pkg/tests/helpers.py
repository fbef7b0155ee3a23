"""Shared generators and independent reference computations for the tests."""

import numpy as np

from sindyc import stlsq


def planted_stlsq_trial(seed, p=12, m=200, n=2, k=3):
    """Random orthogonal-ish library with a planted ``k``-sparse model.

    Returns ``(recovered, planted)`` coefficient arrays. Planted magnitudes
    lie in [0.5, 2] and the threshold is 0.1, so exact recovery is expected.
    """
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((p, m))
    xi = np.zeros((n, p))
    for i in range(n):
        support = rng.choice(p, size=k, replace=False)
        xi[i, support] = rng.uniform(0.5, 2.0, k) * rng.choice([-1, 1], k)
    targets = xi @ theta
    return stlsq(theta, targets, 0.1).values, xi


def random_stable_system(rng, n):
    """Random ``A`` with distinct eigenvalues inside the unit disk."""
    while True:
        Q = rng.standard_normal((n, n))
        lam = rng.uniform(0.3, 0.95, n) * rng.choice([-1, 1], n)
        A = Q @ np.diag(lam) @ np.linalg.inv(Q)
        if np.linalg.cond(Q) < 1e3:
            return A


def iterate_linear(A, x0, steps, B=None, U=None):
    X = np.empty((A.shape[0], steps + 1))
    X[:, 0] = x0
    for k in range(steps):
        X[:, k + 1] = A @ X[:, k] + (0 if B is None else B @ U[:, k])
    return X


def match_eigenvalues(a, b):
    """Largest distance after greedily pairing each eigenvalue of ``a`` with
    its nearest unused partner in ``b``."""
    b = list(b)
    worst = 0.0
    for z in a:
        j = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(j)))
    return worst
