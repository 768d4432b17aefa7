"""Cycle bases, cycle-edge incidence matrices and tropical Torelli matrices.

Two models are available in :func:`torelli_matrix`:

``"graph"``
    Fundamental cycles of the minimum spanning forest of ``g`` itself, with the
    canonical (or the input) orientation, chords sorted by length.

``"minimal"`` (default)
    The same construction run on the graph obtained by smoothing out every
    degree-2 node, then lifted back to the edges of ``g``. Subdividing an edge
    only lengthens a branch, so the result does not depend on the
    refinement chosen to represent the metric graph.

Both produce ``Q = M L M^T`` with ``M = [M_T, I_g]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from tmgk._backend import core
from tmgk.graph import (
    SpanningForest,
    WeightedGraph,
    _chord_flips,
    _component_labels,
    _forest_from_mask,
    _require_generic,
    _tree_flips,
    branch_decomposition,
    canonical_orientation,
    is_generic,
    jitter_ties,
    minimum_spanning_forest,
)
from tmgk.errors import InvalidParameters, NonGenericLengths

MODELS = ("minimal", "graph")
ORIENTATIONS = ("canonical", "input")
_DENSE_FLOPS = 20_000_000  # dense product when g * g * m is below this


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycles, one per chord, in block order.

    Cycle ``i`` is ``chords[i]`` with coefficient +1 plus
    ``path_signs[k] * path_edges[k]`` for ``k`` in ``indptr[i]:indptr[i+1]``.
    Signs refer to the orientation of ``graph``.
    """

    graph: WeightedGraph
    tree_edges: np.ndarray  # column order of M_T
    chords: np.ndarray
    chord_component: np.ndarray
    indptr: np.ndarray
    path_edges: np.ndarray
    path_signs: np.ndarray

    @property
    def genus(self) -> int:
        return len(self.chords)

    def cycle(self, i: int) -> dict:
        """Nonzero coefficients of cycle ``i`` keyed by edge index."""
        out = {int(self.chords[i]): 1}
        lo, hi = self.indptr[i], self.indptr[i + 1]
        for e, s in zip(self.path_edges[lo:hi].tolist(), self.path_signs[lo:hi].tolist()):
            out[e] = s
        return out

    def dense(self) -> np.ndarray:
        """``g x m`` coefficient matrix with columns in input edge order."""
        M = np.zeros((self.genus, self.graph.edge_count), dtype=np.int64)
        rows = np.repeat(np.arange(self.genus), np.diff(self.indptr))
        M[rows, self.path_edges] = self.path_signs
        M[np.arange(self.genus), self.chords] = 1
        return M


@dataclass(frozen=True)
class IncidenceMatrix:
    """Sparse ``M = [M_T, I_g]``; column ``k`` is edge ``column_edges[k]``."""

    matrix: sparse.csr_array
    column_edges: np.ndarray
    tree_count: int

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def tree_block(self) -> sparse.csr_array:
        return self.matrix[:, : self.tree_count]

    def dense(self, original_order: bool = False) -> np.ndarray:
        M = self.matrix.toarray()
        if not original_order:
            return M
        out = np.zeros_like(M)
        out[:, self.column_edges] = M
        return out


def cycle_basis(g: WeightedGraph, forest: SpanningForest) -> CycleBasis:
    """Fundamental cycles of ``forest`` with chords sorted by length per component.

    ``g`` is used with its current orientation; apply
    :func:`~tmgk.graph.canonical_orientation` first for the canonical signs.
    """
    _require_generic(g)
    _, labels = _component_labels(g.node_count, g.tails, g.heads)
    chords = np.flatnonzero(~forest.in_tree)
    comp = labels[g.tails[chords]]
    order = np.lexsort((chords, g.lengths[chords], comp))
    tree = np.flatnonzero(forest.in_tree)
    tree = tree[np.lexsort((tree, g.lengths[tree]))]
    return _basis(g, tree, chords[order], comp[order], forest)


def _basis(g, tree_cols, chords, comp, forest) -> CycleBasis:
    # path from head to tail of each chord closes the cycle chord + path
    indptr, path_edges, froms = core.tree_paths(
        forest.parent, forest.parent_edge, forest.depth, g.heads[chords], g.tails[chords]
    )
    signs = np.where(g.tails[path_edges] == froms, 1, -1).astype(np.int64)
    return CycleBasis(
        graph=g,
        tree_edges=np.asarray(tree_cols, dtype=np.int64),
        chords=np.asarray(chords, dtype=np.int64),
        chord_component=np.asarray(comp, dtype=np.int64),
        indptr=indptr,
        path_edges=path_edges,
        path_signs=signs,
    )


def incidence_matrix(basis: CycleBasis) -> IncidenceMatrix:
    columns = np.concatenate([basis.tree_edges, basis.chords]).astype(np.int64)
    col_of = np.full(basis.graph.edge_count, -1, dtype=np.int64)
    col_of[columns] = np.arange(len(columns))
    g = basis.genus
    rows = np.concatenate(
        [np.repeat(np.arange(g), np.diff(basis.indptr)), np.arange(g)]
    )
    cols = np.concatenate([col_of[basis.path_edges], col_of[basis.chords]])
    vals = np.concatenate([basis.path_signs, np.ones(g, dtype=np.int64)])
    M = sparse.csr_array(
        (vals.astype(np.int8), (rows, cols)), shape=(g, len(columns))
    )
    M.sort_indices()
    return IncidenceMatrix(matrix=M, column_edges=columns, tree_count=len(basis.tree_edges))


def torelli_from_basis(basis: CycleBasis, lengths=None) -> np.ndarray:
    """``Q = M L M^T`` for a fixed basis, optionally with replacement lengths."""
    L = basis.graph.lengths if lengths is None else np.asarray(lengths, dtype=np.float64)
    if L.shape != (basis.graph.edge_count,):
        raise ValueError(f"expected {basis.graph.edge_count} lengths, got shape {L.shape}")
    g = basis.genus
    m = basis.graph.edge_count
    if g == 0:
        return np.zeros((0, 0))
    rows = np.concatenate([np.repeat(np.arange(g), np.diff(basis.indptr)), np.arange(g)])
    cols = np.concatenate([basis.path_edges, basis.chords])
    vals = np.concatenate([basis.path_signs, np.ones(g, dtype=np.int64)]).astype(np.float64)
    # columns in ascending length order so the sum does not depend on edge ids
    order = np.argsort(basis.graph.lengths, kind="stable")
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m)
    cols, L = rank[cols], L[order]
    if g * g * m <= _DENSE_FLOPS:
        A = np.zeros((g, m))
        A[rows, cols] = vals
        Q = (A * L) @ A.T
    else:
        A = sparse.csr_array((vals, (rows, cols)), shape=(g, m))
        Q = (A.multiply(L[None, :]) @ A.T).toarray()
    return (Q + Q.T) / 2


@dataclass(frozen=True, eq=False)
class TorelliMatrix:
    Q: np.ndarray
    genus: int
    graph_id: str | None = None
    generic: bool = True
    jitter_seed: int | None = None
    model: str = "minimal"
    orientation: str = "canonical"
    block_sizes: tuple = ()
    branch_ties: int = 0
    basis: CycleBasis | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.float64, copy=True)
        Q.flags.writeable = False
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.Q, dtype=dtype)

    def metadata(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "genus": self.genus,
            "generic": self.generic,
            "jitter_seed": self.jitter_seed,
            "model": self.model,
            "orientation": self.orientation,
            "block_sizes": list(self.block_sizes),
            "branch_ties": self.branch_ties,
        }


def _reorder_csr(indptr, arrays, perm):
    counts = np.diff(indptr)[perm]
    new_ptr = np.zeros(len(perm) + 1, dtype=np.int64)
    np.cumsum(counts, out=new_ptr[1:])
    idx = np.arange(new_ptr[-1]) + np.repeat(indptr[:-1][perm] - new_ptr[:-1], counts)
    return new_ptr, [a[idx] for a in arrays]


def _count_ties(values) -> int:
    v = np.sort(values)
    if not np.any(v[1:] == v[:-1]):
        return 0
    _, counts = np.unique(v, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def _minimal_basis(g: WeightedGraph) -> tuple[CycleBasis, int]:
    """Cycle basis of ``g`` induced by the branch graph.

    Ties among branch lengths (possible even for generic ``g``) are broken
    by anchor ids, then by the length of the fundamental cycle for chords;
    both are unchanged by subdivision.
    """
    bd = branch_decomposition(g)
    H = bd.graph
    nb = bd.branch_count
    lam = bd.lengths
    lo = np.minimum(bd.tails, bd.heads)
    hi = np.maximum(bd.tails, bd.heads)
    idx = np.arange(nb)
    order = np.lexsort((idx, hi, lo, lam))
    in_tree = core.kruskal_forest(H.node_count, H.tails, H.heads, order)
    comps = _component_labels(H.node_count, H.tails, H.heads)
    forest = _forest_from_mask(H.node_count, H.tails, H.heads, in_tree, comps)
    labels = comps[1]

    chords = np.flatnonzero(~in_tree)
    flips = _tree_flips(H.node_count, H.tails, H.heads, lam, in_tree)
    ptr0, pe0, _ = core.tree_paths(
        forest.parent, forest.parent_edge, forest.depth, H.tails[chords], H.heads[chords]
    )
    flips |= _chord_flips(H.tails, H.heads, lam, chords, ptr0, pe0)
    Ho = H.reoriented(flips)

    ptr, pe, froms = core.tree_paths(
        forest.parent, forest.parent_edge, forest.depth, Ho.heads[chords], Ho.tails[chords]
    )
    signs = np.where(Ho.tails[pe] == froms, 1, -1).astype(np.int64)
    q = len(chords)
    cyc_len = lam[chords] + np.bincount(
        np.repeat(np.arange(q), np.diff(ptr)), weights=lam[pe], minlength=q
    )
    comp = labels[H.tails[chords]]
    perm = np.lexsort((chords, hi[chords], lo[chords], cyc_len, lam[chords], comp))
    chords, comp = chords[perm], comp[perm]
    ptr, (pe, signs) = _reorder_csr(ptr, [pe, signs], perm)

    # lift to the edges of g
    direction = np.where(flips, -1, 1)
    branch_of = bd.branch_of_edge()
    edge_dir = np.empty(g.edge_count, dtype=np.int64)
    edge_dir[bd.edge_ids] = bd.edge_dirs
    agree = edge_dir * direction[branch_of]
    Go = g.reoriented(agree < 0)

    # segments: chord branch (+1) then its tree path, each expanded to edges of g
    owner = np.concatenate([np.arange(q), np.repeat(np.arange(q), np.diff(ptr))])
    seq = np.concatenate([np.full(q, -1), np.arange(len(pe))])
    o = np.lexsort((seq, owner))
    seg_branch = np.concatenate([chords, pe])[o]
    seg_coef = np.concatenate([np.ones(q, dtype=np.int64), signs])[o]
    owner = owner[o]
    first = bd.edge_ptr[seg_branch]
    lens = bd.edge_ptr[seg_branch + 1] - first
    offs = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
    edges = bd.edge_ids[np.repeat(first, lens) + offs]
    coefs = np.repeat(seg_coef, lens)
    owners = np.repeat(owner, lens)
    in_chord = np.repeat(seq[o] < 0, lens)

    # designated chord edge: longest edge of the branch, smallest index among equals
    ce, co = edges[in_chord], owners[in_chord]
    pick = np.lexsort((ce, -g.lengths[ce], co))
    co_sorted = co[pick]
    lead = np.concatenate([[True], co_sorted[1:] != co_sorted[:-1]])[: len(pick)]
    designated = ce[pick][lead]

    keep = edges != designated[owners]
    path_edges, path_signs = edges[keep], coefs[keep]
    out_ptr = np.concatenate([[0], np.cumsum(np.bincount(owners[keep], minlength=q))])

    is_chord = np.zeros(g.edge_count, dtype=bool)
    is_chord[designated] = True
    tree = np.flatnonzero(~is_chord)
    tree = tree[np.lexsort((tree, g.lengths[tree]))]
    basis = CycleBasis(
        graph=Go,
        tree_edges=tree,
        chords=designated,
        chord_component=comp,
        indptr=np.asarray(out_ptr, dtype=np.int64),
        path_edges=path_edges.astype(np.int64),
        path_signs=path_signs,
    )
    return basis, _count_ties(lam)


def torelli_basis(
    g: WeightedGraph,
    *,
    model: str = "minimal",
    orientation: str = "canonical",
) -> tuple[CycleBasis, int]:
    """The cycle basis used by :func:`torelli_matrix` and its branch-tie count."""
    if model not in MODELS:
        raise InvalidParameters(f"model must be one of {MODELS}, got {model!r}")
    if orientation not in ORIENTATIONS:
        raise InvalidParameters(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    if model == "minimal":
        if orientation != "canonical":
            raise InvalidParameters("the minimal model always uses the canonical orientation")
        return _minimal_basis(g)
    forest = minimum_spanning_forest(g)
    oriented = canonical_orientation(g, forest) if orientation == "canonical" else g
    return cycle_basis(oriented, forest), 0


def torelli_matrix(
    g: WeightedGraph,
    *,
    model: str = "minimal",
    orientation: str = "canonical",
    jitter_seed: int | None = None,
    graph_id: str | None = None,
) -> TorelliMatrix:
    """Tropical Torelli matrix, block-diagonal over components.

    Duplicate edge lengths raise :class:`NonGenericLengths` unless
    ``jitter_seed`` is given, in which case ties are broken by a seeded
    perturbation and the seed is recorded.
    """
    report = is_generic(g)
    used_seed = None
    if not report.generic:
        if jitter_seed is None:
            shown = ", ".join(f"({a}, {b})" for a, b in report.duplicates[:5])
            where = f" in graph {graph_id!r}" if graph_id is not None else ""
            raise NonGenericLengths(
                f"duplicate edge lengths{where}: {shown}", report.duplicates, graph_id
            )
        g = jitter_ties(g, jitter_seed)
        used_seed = int(jitter_seed)
    try:
        basis, ties = torelli_basis(g, model=model, orientation=orientation)
    except NonGenericLengths as exc:
        exc.graph_id = graph_id
        raise
    Q = torelli_from_basis(basis)
    blocks = tuple(np.bincount(basis.chord_component).tolist()) if basis.genus else ()
    return TorelliMatrix(
        Q=Q,
        genus=basis.genus,
        graph_id=graph_id,
        generic=report.generic,
        jitter_seed=used_seed,
        model=model,
        orientation=orientation,
        block_sizes=blocks,
        branch_ties=ties,
        basis=basis,
    )
