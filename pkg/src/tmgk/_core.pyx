# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics match ``tmgk._pycore`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline i64 _find(i64[::1] parent, i64 x) noexcept nogil:
    cdef i64 root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def kruskal_forest(i64 n, tails, heads, order):
    cdef const i64[::1] t = np.ascontiguousarray(tails, dtype=np.int64)
    cdef const i64[::1] h = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const i64[::1] o = np.ascontiguousarray(order, dtype=np.int64)
    cdef i64[::1] parent = np.arange(n, dtype=np.int64)
    out = np.zeros(t.shape[0], dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_tree = out
    cdef Py_ssize_t k
    cdef i64 e, ru, rv
    with nogil:
        for k in range(o.shape[0]):
            e = o[k]
            ru = _find(parent, t[e])
            rv = _find(parent, h[e])
            if ru != rv:
                parent[ru] = rv
                in_tree[e] = 1
    return out.astype(bool)


def root_forest(i64 n, tails, heads, tree_edges, roots):
    cdef const i64[::1] t = np.ascontiguousarray(tails, dtype=np.int64)
    cdef const i64[::1] h = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const i64[::1] te = np.ascontiguousarray(tree_edges, dtype=np.int64)
    cdef const i64[::1] rt = np.ascontiguousarray(roots, dtype=np.int64)
    cdef Py_ssize_t k, j
    cdef i64 e, u, v, x, y, r, head_q, tail_q
    deg_np = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] start = deg_np
    for k in range(te.shape[0]):
        e = te[k]
        start[t[e] + 1] += 1
        start[h[e] + 1] += 1
    for k in range(n):
        start[k + 1] += start[k]
    cdef i64[::1] fill = np.array(deg_np[:n], dtype=np.int64)
    cdef i64[::1] nbr = np.empty(2 * te.shape[0], dtype=np.int64)
    cdef i64[::1] nbr_e = np.empty(2 * te.shape[0], dtype=np.int64)
    for k in range(te.shape[0]):
        e = te[k]
        u = t[e]
        v = h[e]
        nbr[fill[u]] = v
        nbr_e[fill[u]] = e
        fill[u] += 1
        nbr[fill[v]] = u
        nbr_e[fill[v]] = e
        fill[v] += 1
    parent_np = np.full(n, -1, dtype=np.int64)
    pe_np = np.full(n, -1, dtype=np.int64)
    depth_np = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] parent = parent_np
    cdef i64[::1] pe = pe_np
    cdef i64[::1] depth = depth_np
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    with nogil:
        for k in range(rt.shape[0]):
            r = rt[k]
            if depth[r] >= 0:
                continue
            depth[r] = 0
            head_q = 0
            tail_q = 0
            queue[tail_q] = r
            tail_q += 1
            while head_q < tail_q:
                x = queue[head_q]
                head_q += 1
                for j in range(start[x], start[x + 1]):
                    y = nbr[j]
                    if depth[y] < 0:
                        depth[y] = depth[x] + 1
                        parent[y] = x
                        pe[y] = nbr_e[j]
                        queue[tail_q] = y
                        tail_q += 1
    return parent_np, pe_np, depth_np


def tree_paths(parent_in, parent_edge_in, depth_in, src_in, dst_in):
    cdef const i64[::1] parent = np.ascontiguousarray(parent_in, dtype=np.int64)
    cdef const i64[::1] pe = np.ascontiguousarray(parent_edge_in, dtype=np.int64)
    cdef const i64[::1] depth = np.ascontiguousarray(depth_in, dtype=np.int64)
    cdef const i64[::1] src = np.ascontiguousarray(src_in, dtype=np.int64)
    cdef const i64[::1] dst = np.ascontiguousarray(dst_in, dtype=np.int64)
    cdef Py_ssize_t q = src.shape[0], k
    cdef i64 x, y, steps, pos, up_n, down_n, d
    indptr_np = np.zeros(q + 1, dtype=np.int64)
    cdef i64[::1] indptr = indptr_np
    with nogil:
        for k in range(q):
            x = src[k]
            y = dst[k]
            steps = 0
            while depth[x] > depth[y]:
                x = parent[x]
                steps += 1
            while depth[y] > depth[x]:
                y = parent[y]
                steps += 1
            while x != y:
                x = parent[x]
                y = parent[y]
                steps += 2
            indptr[k + 1] = indptr[k] + steps
    edges_np = np.empty(indptr[q], dtype=np.int64)
    froms_np = np.empty(indptr[q], dtype=np.int64)
    cdef i64[::1] edges = edges_np
    cdef i64[::1] froms = froms_np
    with nogil:
        for k in range(q):
            x = src[k]
            y = dst[k]
            # upward half fills forward from indptr[k]; downward half fills
            # backward from indptr[k+1]
            pos = indptr[k]
            d = indptr[k + 1]
            while depth[x] > depth[y]:
                edges[pos] = pe[x]
                froms[pos] = x
                pos += 1
                x = parent[x]
            while depth[y] > depth[x]:
                d -= 1
                edges[d] = pe[y]
                froms[d] = parent[y]
                y = parent[y]
            while x != y:
                edges[pos] = pe[x]
                froms[pos] = x
                pos += 1
                x = parent[x]
                d -= 1
                edges[d] = pe[y]
                froms[d] = parent[y]
                y = parent[y]
    return indptr_np, edges_np, froms_np


def smo_solve(Q_in, y_in, double C, double tol, i64 max_iter, bint record):
    cdef const double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0], t
    cdef double tau = 1e-12
    alpha_np = np.zeros(n)
    grad_np = -np.ones(n)
    hist_np = np.empty(max_iter + 1 if record else 0)
    cdef double[::1] alpha = alpha_np
    cdef double[::1] grad = grad_np
    cdef double[::1] hist = hist_np
    cdef i64 it = 0
    cdef Py_ssize_t i, j
    cdef double gmax, gmin, score, b, a, obj, best
    cdef double ai_old, aj_old, ai, aj, quad, delta, diff, total, dai, daj, acc
    cdef bint in_up, in_low
    if record:
        hist[0] = 0.0
    with nogil:
        while it < max_iter:
            i = -1
            gmax = -1e300
            gmin = 1e300
            for t in range(n):
                score = -y[t] * grad[t]
                if y[t] > 0:
                    in_up = alpha[t] < C
                    in_low = alpha[t] > 0
                else:
                    in_up = alpha[t] > 0
                    in_low = alpha[t] < C
                if in_up and (i < 0 or score > gmax):
                    gmax = score
                    i = t
                if in_low and score < gmin:
                    gmin = score
            if i < 0 or gmin == 1e300:
                break
            if gmax - gmin < tol:
                break
            j = -1
            best = 1e300
            for t in range(n):
                if y[t] > 0:
                    in_low = alpha[t] > 0
                else:
                    in_low = alpha[t] < C
                score = -y[t] * grad[t]
                if in_low and score < gmax:
                    b = gmax - score
                    a = Q[i, i] + Q[t, t] - 2.0 * y[i] * y[t] * Q[i, t]
                    if not a > 0:
                        a = tau
                    obj = -(b * b) / a
                    if j < 0 or obj < best:
                        best = obj
                        j = t
            ai_old = alpha[i]
            aj_old = alpha[j]
            if y[i] != y[j]:
                quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
                if quad <= 0:
                    quad = tau
                delta = (-grad[i] - grad[j]) / quad
                diff = ai_old - aj_old
                ai = ai_old + delta
                aj = aj_old + delta
                if diff > 0:
                    if aj < 0:
                        aj = 0.0
                        ai = diff
                else:
                    if ai < 0:
                        ai = 0.0
                        aj = -diff
                if diff > 0:
                    if ai > C:
                        ai = C
                        aj = C - diff
                else:
                    if aj > C:
                        aj = C
                        ai = C + diff
            else:
                quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
                if quad <= 0:
                    quad = tau
                delta = (grad[i] - grad[j]) / quad
                total = ai_old + aj_old
                ai = ai_old - delta
                aj = aj_old + delta
                if total > C:
                    if ai > C:
                        ai = C
                        aj = total - C
                else:
                    if aj < 0:
                        aj = 0.0
                        ai = total
                if total > C:
                    if aj > C:
                        aj = C
                        ai = total - C
                else:
                    if ai < 0:
                        ai = 0.0
                        aj = total
            alpha[i] = ai
            alpha[j] = aj
            dai = ai - ai_old
            daj = aj - aj_old
            for t in range(n):
                grad[t] += Q[i, t] * dai + Q[j, t] * daj
            it += 1
            if record:
                acc = 0.0
                for t in range(n):
                    acc += alpha[t] * (grad[t] - 1.0)
                hist[it] = -0.5 * acc
    if record:
        hist_np = hist_np[: it + 1]
    return alpha_np, grad_np, it, hist_np


def component_minima(i64 n, tails, heads):
    cdef const i64[::1] t = np.ascontiguousarray(tails, dtype=np.int64)
    cdef const i64[::1] h = np.ascontiguousarray(heads, dtype=np.int64)
    out = np.arange(n, dtype=np.int64)
    cdef i64[::1] parent = out
    cdef Py_ssize_t k
    cdef i64 ru, rv
    with nogil:
        for k in range(t.shape[0]):
            ru = _find(parent, t[k])
            rv = _find(parent, h[k])
            if ru < rv:
                parent[rv] = ru
            elif rv < ru:
                parent[ru] = rv
        for k in range(n):
            parent[k] = _find(parent, k)
    return out


def tree_flips(i64 n, tails, heads, lengths, in_tree):
    cdef const i64[::1] t = np.ascontiguousarray(tails, dtype=np.int64)
    cdef const i64[::1] h = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const double[::1] L = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const cnp.uint8_t[::1] mask = np.ascontiguousarray(in_tree, dtype=np.uint8)
    cdef double[::1] min1 = np.full(n, np.inf)
    cdef double[::1] min2 = np.full(n, np.inf)
    cdef i64[::1] min1_edge = np.full(n, -1, dtype=np.int64)
    out = np.zeros(t.shape[0], dtype=np.uint8)
    cdef cnp.uint8_t[::1] flips = out
    cdef Py_ssize_t e
    cdef int side
    cdef i64 x, u, v
    cdef double w, wu, wv
    with nogil:
        for e in range(t.shape[0]):
            if not mask[e]:
                continue
            w = L[e]
            for side in range(2):
                x = t[e] if side == 0 else h[e]
                if w < min1[x]:
                    min2[x] = min1[x]
                    min1[x] = w
                    min1_edge[x] = e
                elif w < min2[x]:
                    min2[x] = w
        for e in range(t.shape[0]):
            if not mask[e]:
                continue
            u = t[e]
            v = h[e]
            wu = min2[u] if min1_edge[u] == e else min1[u]
            wv = min2[v] if min1_edge[v] == e else min1[v]
            if wu == INFINITY:
                wu = 0.0
            if wv == INFINITY:
                wv = 0.0
            flips[e] = (wv < wu) or (wv == wu and v < u)
    return out.astype(bool)
