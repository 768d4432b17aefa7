"""Weighted multigraphs with positive edge lengths.

Orientation is carried by endpoint order: edge ``i`` runs ``tails[i] -> heads[i]``.
Parallel edges and self-loops are allowed. All objects are immutable; every
operation returns a new graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from tmgk._backend import core
from tmgk.errors import (
    EmptyGraph,
    NodeIdOutOfRange,
    NonGenericLengths,
    NonPositiveLength,
    SplitOutOfRange,
)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True).reshape(-1)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tails", _frozen(self.tails, np.int64))
        object.__setattr__(self, "heads", _frozen(self.heads, np.int64))
        object.__setattr__(self, "lengths", _frozen(self.lengths, np.float64))
        if not (len(self.tails) == len(self.heads) == len(self.lengths)):
            raise ValueError("tails, heads and lengths must have equal size")
        if self.node_count < 0:
            raise NodeIdOutOfRange(f"negative node count {self.node_count}")
        if len(self.tails):
            lo = min(self.tails.min(), self.heads.min())
            hi = max(self.tails.max(), self.heads.max())
            if lo < 0 or hi >= self.node_count:
                raise NodeIdOutOfRange(
                    f"node ids must lie in [0, {self.node_count}); got range [{lo}, {hi}]"
                )
            bad = np.flatnonzero(~(self.lengths > 0))
            if bad.size:
                i = int(bad[0])
                raise NonPositiveLength(f"edge {i} has non-positive length {self.lengths[i]!r}")

    @property
    def edge_count(self) -> int:
        return int(self.tails.shape[0])

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [
            (int(u), int(v), float(w)) for u, v, w in zip(self.tails, self.heads, self.lengths)
        ]

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.lengths, other.lengths)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"WeightedGraph(n={self.node_count}, m={self.edge_count})"

    def with_lengths(self, lengths) -> "WeightedGraph":
        return WeightedGraph(self.node_count, self.tails, self.heads, lengths)

    def reoriented(self, flip) -> "WeightedGraph":
        """Reverse the edges selected by the boolean mask ``flip``."""
        flip = np.asarray(flip, dtype=bool)
        if flip.shape != self.tails.shape:
            raise ValueError(f"flip mask must have shape {self.tails.shape}, got {flip.shape}")
        tails = np.where(flip, self.heads, self.tails)
        heads = np.where(flip, self.tails, self.heads)
        return _unchecked_graph(self.node_count, tails, heads, self.lengths)

    def degrees(self) -> np.ndarray:
        """Node degrees; a self-loop contributes 2."""
        deg = np.bincount(self.tails, minlength=self.node_count)
        deg += np.bincount(self.heads, minlength=self.node_count)
        return deg


def _unchecked_graph(n, tails, heads, lengths) -> WeightedGraph:
    """Skip validation for arrays derived from an already valid graph."""
    g = object.__new__(WeightedGraph)
    for name, a in (("tails", tails), ("heads", heads), ("lengths", lengths)):
        if a.flags.writeable:
            a = a.copy()
            a.flags.writeable = False
        object.__setattr__(g, name, a)
    object.__setattr__(g, "node_count", n)
    return g


def build_graph(node_count: int, edge_triples: Iterable) -> WeightedGraph:
    """Graph from ``(u, v, length)`` triples, oriented ``u -> v`` as listed."""
    triples = list(edge_triples)
    if triples:
        tails, heads, lengths = zip(*triples)
    else:
        tails, heads, lengths = (), (), ()
    for i, (u, v) in enumerate(zip(tails, heads)):
        if int(u) != u or int(v) != v:
            raise NodeIdOutOfRange(f"edge {i}: node ids must be integers, got ({u}, {v})")
    return WeightedGraph(int(node_count), tails, heads, lengths)


# -- components ---------------------------------------------------------------


def _component_labels(n: int, tails, heads) -> tuple[int, np.ndarray]:
    """Component label per node, components numbered by their smallest node id."""
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    minima = np.asarray(core.component_minima(n, tails, heads), dtype=np.int64)
    # minima are node ids, so ranking them orders components by smallest node
    is_min = np.zeros(n, dtype=np.int64)
    is_min[minima] = 1
    rank = np.cumsum(is_min) - 1
    return int(rank[-1]) + 1, rank[minima]


@dataclass(frozen=True)
class ComponentDecomposition:
    node_labels: np.ndarray
    edge_labels: np.ndarray
    nodes: tuple
    edges: tuple

    def __len__(self):
        return len(self.nodes)


def components(g: WeightedGraph) -> ComponentDecomposition:
    count, labels = _component_labels(g.node_count, g.tails, g.heads)
    edge_labels = labels[g.tails] if g.edge_count else np.zeros(0, dtype=np.int64)
    node_order = np.argsort(labels, kind="stable")
    node_split = np.cumsum(np.bincount(labels, minlength=count))[:-1]
    edge_order = np.argsort(edge_labels, kind="stable")
    edge_split = np.cumsum(np.bincount(edge_labels, minlength=count))[:-1]
    return ComponentDecomposition(
        node_labels=labels,
        edge_labels=edge_labels,
        nodes=tuple(np.split(node_order, node_split)) if count else (),
        edges=tuple(np.split(edge_order, edge_split)) if count else (),
    )


def genus(g: WeightedGraph) -> int:
    """First Betti number: sum over components of ``m_i - n_i + 1``."""
    count, _ = _component_labels(g.node_count, g.tails, g.heads)
    return g.edge_count - g.node_count + count


# -- genericity -----------------------------------------------------------------


class Genericity(NamedTuple):
    generic: bool
    duplicates: list  # pairs (i, j), i < j, of edges sharing a length

    def __bool__(self):
        return self.generic


def is_generic(g: WeightedGraph) -> Genericity:
    """Pairwise-distinct lengths; distinct weights already force a unique MST."""
    order = np.argsort(g.lengths, kind="stable")
    sorted_len = g.lengths[order]
    if not np.any(sorted_len[1:] == sorted_len[:-1]):
        return Genericity(True, [])
    pairs = []
    start = 0
    for k in range(1, len(order) + 1):
        if k == len(order) or sorted_len[k] != sorted_len[start]:
            group = sorted(int(i) for i in order[start:k])
            pairs.extend((a, b) for ai, a in enumerate(group) for b in group[ai + 1 :])
            start = k
    return Genericity(not pairs, pairs)


def jitter_ties(g: WeightedGraph, seed: int) -> WeightedGraph:
    """Break length ties with seeded offsets of size at most ``1e-9 * min(length)``.

    Only edges that share a length are moved; a generic graph is returned as is.
    """
    report = is_generic(g)
    if report.generic:
        return g
    rng = np.random.default_rng(seed)
    scale = 1e-9 * float(g.lengths.min())
    tied = sorted({i for pair in report.duplicates for i in pair})
    lengths = g.lengths.copy()
    lengths[tied] += scale * rng.uniform(0.0, 1.0, size=len(tied))
    out = g.with_lengths(lengths)
    again = is_generic(out)
    if not again.generic:
        raise NonGenericLengths(
            "jitter could not separate tied lengths at float resolution",
            again.duplicates,
        )
    return out


def _require_generic(g: WeightedGraph) -> None:
    report = is_generic(g)
    if not report.generic:
        shown = ", ".join(f"({a}, {b})" for a, b in report.duplicates[:5])
        more = "" if len(report.duplicates) <= 5 else f" and {len(report.duplicates) - 5} more"
        raise NonGenericLengths(
            f"duplicate edge lengths: {shown}{more}", report.duplicates
        )


# -- spanning forests -------------------------------------------------------------


@dataclass(frozen=True)
class SpanningForest:
    """Tree edges per component, plus a rooted view used for path queries.

    Each component is rooted at its smallest node id.
    """

    in_tree: np.ndarray
    tree_edges: tuple
    parent: np.ndarray = field(repr=False)
    parent_edge: np.ndarray = field(repr=False)
    depth: np.ndarray = field(repr=False)

    @property
    def edge_set(self) -> frozenset:
        return frozenset(int(e) for e in np.flatnonzero(self.in_tree))


def _rooted_forest(n, tails, heads, in_tree, labels, count):
    roots = np.zeros(count, dtype=np.int64)
    if count:
        # smallest node of each component, in component order
        roots[labels[::-1]] = np.arange(n - 1, -1, -1)
    tree_idx = np.flatnonzero(in_tree)
    return core.root_forest(n, tails, heads, tree_idx, roots)


def _forest_from_mask(n, tails, heads, in_tree, comps=None) -> SpanningForest:
    count, labels = _component_labels(n, tails, heads) if comps is None else comps
    parent, parent_edge, depth = _rooted_forest(n, tails, heads, in_tree, labels, count)
    tree_idx = np.flatnonzero(in_tree)
    tree_labels = labels[np.asarray(tails)[tree_idx]] if tree_idx.size else tree_idx
    per_comp = tuple(tree_idx[tree_labels == c] for c in range(count))
    return SpanningForest(
        in_tree=np.asarray(in_tree, dtype=bool),
        tree_edges=per_comp,
        parent=parent,
        parent_edge=parent_edge,
        depth=depth,
    )


def minimum_spanning_forest(g: WeightedGraph) -> SpanningForest:
    """Kruskal's algorithm. Requires pairwise-distinct lengths."""
    _require_generic(g)
    order = np.argsort(g.lengths, kind="stable")
    in_tree = core.kruskal_forest(g.node_count, g.tails, g.heads, order)
    return _forest_from_mask(g.node_count, g.tails, g.heads, in_tree)


# -- canonical orientation ------------------------------------------------------------


def _tree_flips(n, tails, heads, lengths, in_tree) -> np.ndarray:
    """Orient tree edges from low to high omega.

    omega(u) for tree edge e=[u,v] is the smallest length among the *other*
    tree edges at u, or 0 when u is a leaf. Ties go from the smaller node id.
    """
    return np.asarray(core.tree_flips(n, tails, heads, lengths, in_tree), dtype=bool)


def _path_csr(forest_parent, forest_parent_edge, forest_depth, src, dst):
    return core.tree_paths(forest_parent, forest_parent_edge, forest_depth, src, dst)


def _chord_flips(tails, heads, lengths, chords, indptr, path_edges) -> np.ndarray:
    """Orient chord [a,b] from low to high omega.

    omega(a) is the length of the first tree edge on the tree path a -> b, and
    omega(b) that of the last. Ties go from the smaller node id; self-loops keep
    their orientation.
    """
    tails = np.asarray(tails)
    heads = np.asarray(heads)
    lengths = np.asarray(lengths)
    flips = np.zeros(len(tails), dtype=bool)
    if len(chords) == 0:
        return flips
    nonempty = indptr[1:] > indptr[:-1]
    c = np.asarray(chords)[nonempty]
    first = lengths[path_edges[indptr[:-1][nonempty]]]
    last = lengths[path_edges[indptr[1:][nonempty] - 1]]
    a, b = tails[c], heads[c]
    flips[c] = (last < first) | ((last == first) & (b < a))
    return flips


def canonical_orientation(g: WeightedGraph, forest: SpanningForest) -> WeightedGraph:
    """Reorient ``g`` by the low-to-high omega rule for tree edges and chords."""
    _require_generic(g)
    flips = _tree_flips(g.node_count, g.tails, g.heads, g.lengths, forest.in_tree)
    chords = np.flatnonzero(~forest.in_tree)
    indptr, path_edges, _ = _path_csr(
        forest.parent, forest.parent_edge, forest.depth, g.tails[chords], g.heads[chords]
    )
    flips |= _chord_flips(g.tails, g.heads, g.lengths, chords, indptr, path_edges)
    return g.reoriented(flips)


# -- refinement -------------------------------------------------------------------------


def subdivide_edge(g: WeightedGraph, edge_index: int, t: float) -> WeightedGraph:
    """Split edge ``e=[u,v]`` at distance ``t`` from ``u`` through a new node ``w``.

    ``e`` keeps its index as ``[u,w]`` (length ``t``); ``[w,v]`` is appended.
    """
    if not 0 <= edge_index < g.edge_count:
        raise IndexError(f"edge index {edge_index} out of range for {g.edge_count} edges")
    length = float(g.lengths[edge_index])
    if not 0.0 < t < length:
        raise SplitOutOfRange(f"split point {t!r} not inside (0, {length!r})")
    w = g.node_count
    tails = np.append(g.tails, w)
    heads = np.append(g.heads, g.heads[edge_index])
    lengths = np.append(g.lengths, length - t)
    heads[edge_index] = w
    lengths[edge_index] = t
    return WeightedGraph(w + 1, tails, heads, lengths)


def random_refinement(g: WeightedGraph, k: int, seed: int) -> WeightedGraph:
    """Apply ``k`` seeded subdivisions, keeping all edge lengths distinct."""
    if g.edge_count == 0:
        raise EmptyGraph("cannot refine a graph without edges")
    rng = np.random.default_rng(seed)
    seen = set(g.lengths.tolist())
    for _ in range(k):
        while True:
            e = int(rng.integers(g.edge_count))
            length = float(g.lengths[e])
            t = float(rng.uniform(0.0, length))
            rest = length - t
            if 0.0 < t < length and t != rest and t not in seen and rest not in seen:
                break
        g = subdivide_edge(g, e, t)
        seen.update((t, rest))
    return g


# -- bridges ----------------------------------------------------------------------------


def _incidence_lists(g: WeightedGraph):
    adj = [[] for _ in range(g.node_count)]
    for e, (u, v) in enumerate(zip(g.tails.tolist(), g.heads.tolist())):
        adj[u].append((v, e))
        if u != v:
            adj[v].append((u, e))
    return adj


def bridges(g: WeightedGraph) -> frozenset:
    """Edges whose removal disconnects their component (iterative Tarjan low-link)."""
    n = g.node_count
    adj = _incidence_lists(g)
    disc = [-1] * n
    low = [0] * n
    timer = 0
    found = set()
    for s in range(n):
        if disc[s] >= 0:
            continue
        disc[s] = low[s] = timer
        timer += 1
        stack = [(s, -1, iter(adj[s]))]
        while stack:
            v, via, it = stack[-1]
            descended = False
            for w, e in it:
                if e == via:
                    continue
                if disc[w] < 0:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, e, iter(adj[w])))
                    descended = True
                    break
                if disc[w] < low[v]:
                    low[v] = disc[w]
            if descended:
                continue
            stack.pop()
            if stack:
                u = stack[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
                if low[v] > disc[u]:
                    found.add(via)
    return frozenset(found)


def contract_bridges(g: WeightedGraph) -> WeightedGraph:
    """Merge the endpoints of every bridge and drop it.

    Merged groups are renumbered in order of their smallest original node.
    """
    cut = bridges(g)
    parent = list(range(g.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in cut:
        a, b = find(int(g.tails[e])), find(int(g.heads[e]))
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = np.array([find(x) for x in range(g.node_count)], dtype=np.int64)
    # roots are the minimum member of each group, so sorting them orders groups
    uniq = np.unique(roots)
    relabel = np.searchsorted(uniq, roots)
    keep = np.array([e not in cut for e in range(g.edge_count)], dtype=bool)
    return WeightedGraph(
        len(uniq), relabel[g.tails[keep]], relabel[g.heads[keep]], g.lengths[keep]
    )


# -- smoothing degree-2 nodes -------------------------------------------------------------


@dataclass(frozen=True)
class BranchDecomposition:
    """Maximal chains of edges through degree-2 nodes.

    ``anchors`` are the original ids of the nodes kept after smoothing (degree
    other than 2, plus the smallest node of every component that is a bare
    cycle). Branch ``b`` runs from ``anchors[tails[b]]`` to ``anchors[heads[b]]``
    through edges ``edge_ids[edge_ptr[b]:edge_ptr[b+1]]``; ``edge_dirs`` is +1
    where the edge's own orientation agrees with the walk.
    """

    anchors: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    lengths: np.ndarray
    max_edge: np.ndarray
    edge_ptr: np.ndarray
    edge_ids: np.ndarray
    edge_dirs: np.ndarray

    @property
    def branch_count(self) -> int:
        return len(self.tails)

    @property
    def graph(self) -> WeightedGraph:
        """The smoothed graph (nodes are indices into ``anchors``)."""
        return _unchecked_graph(len(self.anchors), self.tails, self.heads, self.lengths)

    def branch_of_edge(self) -> np.ndarray:
        out = np.empty(len(self.edge_ids), dtype=np.int64)
        out[self.edge_ids] = np.repeat(
            np.arange(self.branch_count), np.diff(self.edge_ptr)
        )
        return out


def branch_decomposition(g: WeightedGraph) -> BranchDecomposition:
    n = g.node_count
    deg = g.degrees()
    anchor = deg != 2
    count, labels = _component_labels(n, g.tails, g.heads)
    if count:
        has_anchor = np.bincount(labels[anchor], minlength=count) > 0
        first_node = np.empty(count, dtype=np.int64)
        first_node[labels[::-1]] = np.arange(n - 1, -1, -1)
        anchor[first_node[~has_anchor]] = True
    anchors = np.flatnonzero(anchor)
    index_of = np.full(n, -1, dtype=np.int64)
    index_of[anchors] = np.arange(len(anchors))

    tails = g.tails.tolist()
    heads = g.heads.tolist()
    lengths = g.lengths.tolist()
    is_anchor = anchor.tolist()
    slot = index_of.tolist()
    adj = [[] for _ in range(n)]
    for e in range(g.edge_count):
        adj[tails[e]].append(e)
        adj[heads[e]].append(e)  # self-loops appear twice, as in the degree
    visited = bytearray(g.edge_count)
    b_tail, b_head, b_len, b_max, ptr, ids, dirs = [], [], [], [], [0], [], []
    for a in anchors.tolist():
        for e0 in adj[a]:
            if visited[e0]:
                continue
            node, e = a, e0
            total = 0.0
            longest = 0.0
            while True:
                visited[e] = 1
                forward = tails[e] == node
                nxt = heads[e] if forward else tails[e]
                ids.append(e)
                dirs.append(1 if forward else -1)
                total += lengths[e]
                longest = max(longest, lengths[e])
                if is_anchor[nxt]:
                    break
                e1, e2 = adj[nxt]
                e = e2 if e1 == e else e1
                node = nxt
            b_tail.append(slot[a])
            b_head.append(slot[nxt])
            b_len.append(total)
            b_max.append(longest)
            ptr.append(len(ids))
    return BranchDecomposition(
        anchors=anchors,
        tails=np.asarray(b_tail, dtype=np.int64),
        heads=np.asarray(b_head, dtype=np.int64),
        lengths=np.asarray(b_len, dtype=np.float64),
        max_edge=np.asarray(b_max, dtype=np.float64),
        edge_ptr=np.asarray(ptr, dtype=np.int64),
        edge_ids=np.asarray(ids, dtype=np.int64),
        edge_dirs=np.asarray(dirs, dtype=np.int8),
    )
