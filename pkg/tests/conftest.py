import itertools

import numpy as np
import pytest

from tmgk.graph import build_graph
from tmgk.learn import dual_objective

# e1..e8 with l(e_i) = i, oriented as drawn in the worked example
GOLDEN_EDGES = [
    (0, 2, 1.0),
    (0, 1, 2.0),
    (2, 1, 3.0),
    (3, 0, 4.0),
    (4, 1, 5.0),
    (1, 5, 6.0),
    (4, 5, 7.0),
    (3, 5, 8.0),
]
GOLDEN_Q = np.array([[6.0, 0.0, 2.0], [0.0, 18.0, 6.0], [2.0, 6.0, 20.0]])
GOLDEN_M = np.array(
    [
        [1, -1, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, -1, -1, 1, 0],
        [0, -1, 0, -1, 0, -1, 0, 1],
    ]
)


@pytest.fixture
def golden():
    return build_graph(6, GOLDEN_EDGES)


def random_graph(rng, n, g, low=0.0, high=1.0, loops=False):
    """Path plus random extra edges (parallel edges allowed, loops optional)."""
    edges = [(i, i + 1, rng.uniform(low, high)) for i in range(n - 1)]
    while len(edges) < n - 1 + g:
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v and not loops:
            continue
        edges.append((u, v, rng.uniform(low, high)))
    return build_graph(n, edges)


def boundary(g):
    """Node x edge boundary matrix: d[u -> v] = v - u."""
    B = np.zeros((g.node_count, g.edge_count))
    for e, (u, v, _) in enumerate(g.edges):
        B[v, e] += 1
        B[u, e] -= 1
    return B


def brute_force_dual(K, y, C):
    """Max of sum(a) - 0.5 a'Qa over 0 <= a <= C, y'a = 0 by active-set enumeration.

    Each variable is fixed at 0, fixed at C, or free; the free block solves
    the KKT system of the equality-constrained problem. For PSD ``Q`` the best
    feasible stationary point is the global maximum.
    """
    n = len(y)
    Q = np.outer(y, y) * K
    best = -np.inf
    for states in itertools.product((0, 1, 2), repeat=n):
        s = np.array(states)
        F = np.flatnonzero(s == 2)
        a = np.where(s == 1, C, 0.0)
        B = np.flatnonzero(s != 2)
        if F.size:
            k = F.size
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = Q[np.ix_(F, F)]
            A[:k, k] = y[F]
            A[k, :k] = y[F]
            rhs = np.r_[1.0 - Q[np.ix_(F, B)] @ a[B], -y[B] @ a[B]]
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.linalg.norm(A @ sol - rhs) > 1e-8:
                continue
            a[F] = sol[:k]
        if np.any(a < -1e-9) or np.any(a > C + 1e-9) or abs(y @ a) > 1e-9:
            continue
        best = max(best, dual_objective(K, y, np.clip(a, 0, C)))
    return best
