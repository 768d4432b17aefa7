"""TTE / TTW kernels and Gram matrices over graph datasets.

Both kernels are ``exp(-gamma * d^2)`` between Torelli matrices brought to a
common size ``g0``: TTE uses the Frobenius distance, TTW the Bures-Wasserstein
distance.
"""
from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from tmgk.dataset import GraphDataset
from tmgk.errors import DimensionMismatch, InvalidParameters
from tmgk.psd import (
    _as_array,
    bures_wasserstein_sq,
    reduce_to,
    psd_factor,
)
from tmgk.torelli import torelli_matrix

KINDS = ("TTE", "TTW")


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "TTE"
    gamma: float | str = "auto"
    g0: int | None = None  # None: largest genus in the dataset
    seed: int = 0
    clip: bool = False
    jitter_seed: int | None = None
    model: str = "minimal"

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in KINDS:
            raise InvalidParameters(f"kernel kind must be TTE or TTW, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if isinstance(self.gamma, str):
            if self.gamma != "auto":
                raise InvalidParameters(f"gamma must be positive or 'auto', got {self.gamma!r}")
        elif not (float(self.gamma) > 0):
            raise InvalidParameters(f"gamma must be positive, got {self.gamma!r}")
        if self.g0 is not None and int(self.g0) < 1:
            raise InvalidParameters(f"g0 must be at least 1, got {self.g0}")


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    config: KernelConfig
    ids: tuple

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    @property
    def gamma(self) -> float:
        return float(self.config.gamma)

    def metadata(self) -> dict:
        c = self.config
        return {"kind": c.kind, "gamma": c.gamma, "g0": c.g0, "seed": c.seed, "clip": c.clip}


def graph_seed(master: int, graph_id: str) -> int:
    """Per-graph seed from the master seed and a stable graph id."""
    h = hashlib.blake2b(f"{int(master)}\x1f{graph_id}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def thread_count() -> int:
    env = os.environ.get("TMGK_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidParameters(f"TMGK_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _map(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _resolve_gamma(gamma, sq: np.ndarray) -> float:
    if gamma != "auto":
        return float(gamma)
    iu = np.triu_indices(sq.shape[0], 1)
    nz = sq[iu][sq[iu] > 0]
    return 1.0 / float(np.median(nz)) if nz.size else 1.0


def kernel_value(Q1, Q2, config: KernelConfig) -> float:
    if config.gamma == "auto":
        raise InvalidParameters("kernel_value needs an explicit gamma")
    a, b = _as_array(Q1), _as_array(Q2)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    d2 = squared_distance(a, b, config.kind)
    return float(np.exp(-float(config.gamma) * d2))


def squared_distance(Q1, Q2, kind: str) -> float:
    a, b = _as_array(Q1), _as_array(Q2)
    if kind.upper() == "TTE":
        if a.shape != b.shape:
            raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
        return float(((a - b) ** 2).sum())
    return bures_wasserstein_sq(a, b)


def pairwise_sq_distances(mats, kind: str) -> np.ndarray:
    """Symmetric matrix of squared distances; only ``i < j`` is evaluated."""
    mats = [_as_array(m) for m in mats]
    n = len(mats)
    shapes = {m.shape for m in mats}
    if len(shapes) > 1:
        raise DimensionMismatch(f"matrices have different shapes: {sorted(shapes)}")
    kind = kind.upper()
    if kind == "TTE":
        X = np.stack([m.ravel() for m in mats]) if n else np.zeros((0, 0))

        def row(i):
            diff = X[i + 1 :] - X[i]
            return np.einsum("ij,ij->i", diff, diff)
    else:
        factors = _map(psd_factor, mats)  # also validates every matrix

        def row(i):
            return np.array(
                [
                    bures_wasserstein_sq(mats[i], mats[j], factors=(factors[i], factors[j]))
                    for j in range(i + 1, n)
                ]
            )

    out = np.zeros((n, n))
    for i, r in enumerate(_map(row, range(n))):
        out[i, i + 1 :] = r
    return out + out.T


def gram_from_matrices(mats, ids, config: KernelConfig) -> GramMatrix:
    """Gram matrix over Torelli matrices (any sizes), reduced to a common ``g0``."""
    ids = tuple(str(i) for i in ids)
    if len(ids) != len(mats):
        raise ValueError("one id per matrix required")
    arrays = [_as_array(m) for m in mats]
    g0 = config.g0 if config.g0 is not None else max((a.shape[0] for a in arrays), default=0)
    g0 = max(int(g0), 1)
    reduced = _map(
        lambda k: reduce_to(arrays[k], g0, graph_seed(config.seed, ids[k]))[0].values,
        range(len(arrays)),
    )
    sq = pairwise_sq_distances(reduced, config.kind)
    gamma = _resolve_gamma(config.gamma, sq)
    K = np.exp(-gamma * sq)
    np.fill_diagonal(K, 1.0)
    gm = GramMatrix(K, replace(config, gamma=gamma, g0=g0), ids)
    return spectrum_clip(gm) if config.clip else gm


def torelli_all(dataset: GraphDataset, config: KernelConfig | None = None):
    config = config or KernelConfig()
    return _map(
        lambda k: torelli_matrix(
            dataset.graphs[k],
            model=config.model,
            jitter_seed=config.jitter_seed,
            graph_id=dataset.ids[k],
        ),
        range(len(dataset)),
    )


def gram_matrix(dataset: GraphDataset, config: KernelConfig) -> GramMatrix:
    return gram_from_matrices(torelli_all(dataset, config), dataset.ids, config)


def min_nonzero_eigenvalue(K, tol: float = 1e-6) -> float:
    """Smallest eigenvalue with ``|lambda| > tol``, or 0.0 when there is none."""
    a = _values(K)
    lam = np.linalg.eigvalsh((a + a.T) / 2)
    lam = lam[np.abs(lam) > tol]
    return float(lam.min()) if lam.size else 0.0


def _values(K) -> np.ndarray:
    return K.values if isinstance(K, GramMatrix) else np.asarray(K, dtype=np.float64)


def spectrum_clip(K):
    """Project onto the PSD cone and rescale to unit diagonal where possible."""
    a = _values(K)
    lam, V = np.linalg.eigh((a + a.T) / 2)
    P = (V * np.clip(lam, 0.0, None)) @ V.T
    P = (P + P.T) / 2
    d = np.diag(P).copy()
    pos = d > 0
    scale = np.ones_like(d)
    scale[pos] = 1.0 / np.sqrt(d[pos])
    P = P * scale[:, None] * scale[None, :]
    P[pos, pos] = 1.0
    P = (P + P.T) / 2
    if isinstance(K, GramMatrix):
        return GramMatrix(P, replace(K.config, clip=True), K.ids)
    return P
