"""Pure-Python implementations of the hot kernels.

These mirror ``tmgk._core`` (Cython) function for function and are used when
the compiled extension is unavailable or ``TMGK_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

from collections import deque

import numpy as np


def kruskal_forest(n, tails, heads, order):
    """Scan edges in ``order`` and keep those joining two different trees."""
    parent = list(range(n))
    in_tree = np.zeros(len(tails), dtype=bool)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in order:
        ru = find(int(tails[e]))
        rv = find(int(heads[e]))
        if ru != rv:
            parent[ru] = rv
            in_tree[e] = True
    return in_tree


def root_forest(n, tails, heads, tree_edges, roots):
    adj = [[] for _ in range(n)]
    for e in tree_edges:
        u, v = int(tails[e]), int(heads[e])
        adj[u].append((v, int(e)))
        adj[v].append((u, int(e)))
    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    for r in roots:
        r = int(r)
        if depth[r] >= 0:
            continue
        depth[r] = 0
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for y, e in adj[x]:
                if depth[y] < 0:
                    depth[y] = depth[x] + 1
                    parent[y] = x
                    parent_edge[y] = e
                    queue.append(y)
    return parent, parent_edge, depth


def tree_paths(parent, parent_edge, depth, src, dst):
    """Tree paths ``src[i] -> dst[i]`` as CSR: edge ids and the node each step leaves."""
    indptr = [0]
    edges = []
    froms = []
    for a, b in zip(src, dst):
        x, y = int(a), int(b)
        up_e, up_f, down_e, down_f = [], [], [], []
        while depth[x] > depth[y]:
            up_e.append(parent_edge[x])
            up_f.append(x)
            x = parent[x]
        while depth[y] > depth[x]:
            down_e.append(parent_edge[y])
            down_f.append(parent[y])
            y = parent[y]
        while x != y:
            up_e.append(parent_edge[x])
            up_f.append(x)
            x = parent[x]
            down_e.append(parent_edge[y])
            down_f.append(parent[y])
            y = parent[y]
        edges.extend(up_e)
        edges.extend(reversed(down_e))
        froms.extend(up_f)
        froms.extend(reversed(down_f))
        indptr.append(len(edges))
    return (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(edges, dtype=np.int64),
        np.asarray(froms, dtype=np.int64),
    )


def smo_solve(Q, y, C, tol, max_iter, record):
    """Minimise 0.5 a'Qa - sum(a) s.t. 0 <= a <= C, y'a = 0.

    Second-order working-set selection (Fan, Chen & Lin 2005) with the
    usual clipping for non-positive curvature.
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    tau = 1e-12
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(Q).copy()
    history = np.empty(max_iter + 1 if record else 0)
    if record:
        history[0] = 0.0
    it = 0
    pos = y > 0
    while it < max_iter:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * grad
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        gmax = score[i]
        gmin = score[low].min()
        if gmax - gmin < tol:
            break
        cand = low & (score < gmax)
        b = gmax - score
        a = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, tau)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))

        qi, qj = Q[i], Q[j]
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * Q[i, j]
            if quad <= 0:
                quad = tau
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Q[i, j]
            if quad <= 0:
                quad = tau
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            else:
                if ai < 0:
                    ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += qi * (ai - ai_old) + qj * (aj - aj_old)
        it += 1
        if record:
            history[it] = -0.5 * float(alpha @ (grad - 1.0))
    if record:
        history = history[: it + 1]
    return alpha, grad, it, history


def component_minima(n, tails, heads):
    """Smallest node id in the component of every node."""
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for u, v in zip(tails, heads):
        ru, rv = find(int(u)), find(int(v))
        if ru < rv:
            parent[rv] = ru
        elif rv < ru:
            parent[ru] = rv
    return np.array([find(x) for x in range(n)], dtype=np.int64)


def tree_flips(n, tails, heads, lengths, in_tree):
    """Orient each tree edge from the endpoint of lower omega.

    omega at an endpoint is the smallest length among the other tree edges
    there, or 0 at a leaf. Ties go from the smaller node id.
    """
    inf = float("inf")
    min1, min2, min1_edge = [inf] * n, [inf] * n, [-1] * n
    tree = [int(e) for e in np.flatnonzero(in_tree)]
    for e in tree:
        w = float(lengths[e])
        for x in (int(tails[e]), int(heads[e])):
            if w < min1[x]:
                min2[x], min1[x], min1_edge[x] = min1[x], w, e
            elif w < min2[x]:
                min2[x] = w
    flips = np.zeros(len(tails), dtype=bool)
    for e in tree:
        u, v = int(tails[e]), int(heads[e])
        wu = min2[u] if min1_edge[u] == e else min1[u]
        wv = min2[v] if min1_edge[v] == e else min1[v]
        wu = 0.0 if wu == inf else wu
        wv = 0.0 if wv == inf else wv
        flips[e] = wv < wu or (wv == wu and v < u)
    return flips
