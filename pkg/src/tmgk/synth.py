"""Synthetic graphs by sparsity class, length noise, and sparsity labelling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tmgk.dataset import GraphDataset
from tmgk.errors import EmptyDataset, GenusExceedsComplete, InvalidParameters
from tmgk.graph import WeightedGraph, genus

CLASSES = ("sparse", "semi_sparse", "dense")
CLASS_LABELS = {name: k for k, name in enumerate(CLASSES)}


@dataclass(frozen=True)
class SparsitySpec:
    kind: str  # one of CLASSES
    n: int
    parameter: float  # c_s, c_ss or c_d
    count: int = 1
    seed: int = 0
    label: int | None = None

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in CLASSES:
            raise InvalidParameters(f"sparsity class must be one of {CLASSES}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.n < 2:
            raise InvalidParameters(f"n must be at least 2, got {self.n}")
        if not self.parameter > 0:
            raise InvalidParameters(f"parameter must be positive, got {self.parameter}")
        if kind == "dense" and not self.parameter <= 1:
            raise InvalidParameters(f"dense exponent must lie in (0, 1], got {self.parameter}")
        if self.count < 0:
            raise InvalidParameters(f"count must be nonnegative, got {self.count}")

    @property
    def genus(self) -> int:
        if self.kind == "sparse":
            return int(self.parameter)
        if self.kind == "semi_sparse":
            return int(math.floor(self.parameter * self.n))
        return int(math.floor(self.n ** (1.0 + self.parameter)))


@dataclass(frozen=True)
class NoiseSpec:
    R: float
    seed: int = 0

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidParameters(f"noise magnitude R must be positive, got {self.R}")


def max_simple_genus(n: int) -> int:
    """Genus of the complete simple graph on ``n`` nodes."""
    return n * (n - 1) // 2 - n + 1


def random_connected_graph(
    n: int, g: int, seed: int, low: float = 0.0, high: float = 1.0
) -> WeightedGraph:
    """Path on ``n`` nodes plus ``g`` random simple chords, lengths Unif(low, high).

    Chords never duplicate a path edge or another chord. Lengths are redrawn
    in the (probability zero) event of a tie.
    """
    if n < 2 or g < 0:
        raise InvalidParameters(f"need n >= 2 and g >= 0, got n={n}, g={g}")
    cap = max_simple_genus(n)
    if g > cap:
        raise InvalidParameters(f"genus {g} exceeds simple-graph capacity {cap} for n={n}")
    if not 0 <= low < high:
        raise InvalidParameters(f"need 0 <= low < high, got [{low}, {high})")
    rng = np.random.default_rng(seed)
    if 2 * g > cap:
        a, b = np.triu_indices(n, 2)
        pick = np.sort(rng.choice(len(a), size=g, replace=False))
        chords = np.stack([a[pick], b[pick]], axis=1)
    else:
        seen = set()
        chords = []
        while len(chords) < g:
            u, v = rng.choice(n, size=2, replace=False).tolist()
            u, v = min(u, v), max(u, v)
            if v == u + 1 or (u, v) in seen:
                continue
            seen.add((u, v))
            chords.append((u, v))
        chords = np.asarray(chords, dtype=np.int64).reshape(-1, 2)
    tails = np.concatenate([np.arange(n - 1), chords[:, 0]])
    heads = np.concatenate([np.arange(1, n), chords[:, 1]])
    m = len(tails)
    while True:
        lengths = low + (high - low) * rng.random(m)
        if np.all(lengths > 0) and np.unique(lengths).size == m:
            break
    return WeightedGraph(n, tails, heads, lengths)


def sparsity_suite(spec: SparsitySpec) -> GraphDataset:
    g = spec.genus
    cap = max_simple_genus(spec.n)
    if g > cap:
        raise GenusExceedsComplete(
            f"{spec.kind} suite asks for genus {g}, above the simple-graph maximum {cap} for n={spec.n}"
        )
    seeds = np.random.SeedSequence(spec.seed).generate_state(max(spec.count, 1), dtype=np.uint64)
    graphs = [random_connected_graph(spec.n, g, int(seeds[k])) for k in range(spec.count)]
    label = CLASS_LABELS[spec.kind] if spec.label is None else spec.label
    ids = [f"{spec.kind}-n{spec.n}-{k}" for k in range(spec.count)]
    return GraphDataset(tuple(graphs), [label] * spec.count, tuple(ids))


def perturb_lengths(g: WeightedGraph, spec: NoiseSpec) -> WeightedGraph:
    """Add independent Unif(0, R) noise to every edge length."""
    rng = np.random.default_rng(spec.seed)
    return g.with_lengths(g.lengths + rng.uniform(0.0, spec.R, size=g.edge_count))


@dataclass(frozen=True)
class SparsityReport:
    label: str
    log_ratio: float
    mean_nodes: float
    mean_genus: float


def sparsity_label(mean_nodes: float, mean_genus: float) -> SparsityReport:
    """Label from ``ln(mean_genus / mean_nodes)``: <0 sparse, [0,1) semi-sparse, >=1 dense."""
    if not mean_nodes > 0:
        raise InvalidParameters(f"mean node count must be positive, got {mean_nodes}")
    r = math.log(mean_genus / mean_nodes) if mean_genus > 0 else -math.inf
    label = "sparse" if r < 0 else ("semi_sparse" if r < 1 else "dense")
    return SparsityReport(label, r, float(mean_nodes), float(mean_genus))


def classify_sparsity(dataset) -> SparsityReport:
    graphs = dataset.graphs if isinstance(dataset, GraphDataset) else list(dataset)
    if not graphs:
        raise EmptyDataset("cannot classify an empty dataset")
    n_bar = float(np.mean([g.node_count for g in graphs]))
    g_bar = float(np.mean([genus(g) for g in graphs]))
    return sparsity_label(n_bar, g_bar)
