"""Labelled collections of graphs."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from tmgk.errors import DuplicateId
from tmgk.graph import WeightedGraph, genus


@dataclass(frozen=True, eq=False)
class GraphDataset:
    graphs: tuple
    labels: np.ndarray
    ids: tuple

    def __post_init__(self):
        graphs = tuple(self.graphs)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        ids = tuple(str(i) for i in self.ids)
        if not (len(graphs) == len(labels) == len(ids)):
            raise ValueError(
                f"graphs, labels and ids differ in length: {len(graphs)}, {len(labels)}, {len(ids)}"
            )
        dup = [k for k, c in Counter(ids).items() if c > 1]
        if dup:
            raise DuplicateId(f"duplicate graph ids: {dup[:5]}")
        for g in graphs:
            if not isinstance(g, WeightedGraph):
                raise TypeError(f"expected WeightedGraph, got {type(g).__name__}")
        labels.flags.writeable = False
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_graphs(cls, graphs, labels=None, ids=None) -> "GraphDataset":
        graphs = list(graphs)
        if labels is None:
            labels = np.zeros(len(graphs), dtype=np.int64)
        if ids is None:
            ids = [f"g{i}" for i in range(len(graphs))]
        return cls(tuple(graphs), labels, tuple(ids))

    def __len__(self) -> int:
        return len(self.graphs)

    def subset(self, index) -> "GraphDataset":
        index = np.asarray(index, dtype=np.int64)
        return GraphDataset(
            tuple(self.graphs[i] for i in index),
            self.labels[index],
            tuple(self.ids[i] for i in index),
        )

    def genera(self) -> np.ndarray:
        return np.array([genus(g) for g in self.graphs], dtype=np.int64)

    def node_counts(self) -> np.ndarray:
        return np.array([g.node_count for g in self.graphs], dtype=np.int64)
