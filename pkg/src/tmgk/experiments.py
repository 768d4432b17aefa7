"""Drivers for the synthetic stability, definiteness and runtime studies.

Every driver returns a list of plain dict rows (one per configuration), ready
for :func:`tmgk.io.write_rows`.
"""
from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from tmgk.dataset import GraphDataset
from tmgk.kernels import (
    KernelConfig,
    gram_from_matrices,
    gram_matrix,
    min_nonzero_eigenvalue,
    torelli_all,
)
from tmgk.synth import (
    NoiseSpec,
    SparsitySpec,
    perturb_lengths,
    random_connected_graph,
    sparsity_suite,
)
from tmgk.torelli import torelli_from_basis, torelli_matrix

RATIOS = tuple(round(0.1 * k, 1) for k in range(1, 10))
NOISE_LEVELS = tuple(0.01 * 2**k for k in range(10))  # 0.01 .. 5.12


def relative_error(K_hat, K) -> float:
    """``||K_hat - K||_F^2 / ||K||_F^2``."""
    a = np.asarray(getattr(K_hat, "values", K_hat))
    b = np.asarray(getattr(K, "values", K))
    return float(((a - b) ** 2).sum() / (b**2).sum())


def _seeds(seed: int, count: int) -> list:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def random_dataset(N: int, max_genus: int, seed: int, n_range=(20, 60)) -> GraphDataset:
    """``N`` connected graphs with genus drawn from ``1..max_genus``."""
    rng = np.random.default_rng(seed)
    graphs = []
    for s in _seeds(seed, N):
        g = int(rng.integers(1, max_genus + 1))
        lo = max(n_range[0], _min_nodes(g))
        n = int(rng.integers(lo, max(lo, n_range[1]) + 1))
        graphs.append(random_connected_graph(n, g, s))
    return GraphDataset.from_graphs(graphs)


def _min_nodes(g: int) -> int:
    n = 2
    while n * (n - 1) // 2 - n + 1 < g:
        n += 1
    return n


def subsampling_stability(
    dataset: GraphDataset,
    ratios=RATIOS,
    repeats: int = 10,
    kinds=("TTW", "TTE"),
    seed: int = 0,
) -> list:
    """Mean relative Gram error when every Torelli matrix is cut to ``round(rho * g)``.

    ``gamma`` is fixed by the median heuristic on the unreduced Gram and
    reused for all reduced ones, so only the reduction varies.
    """
    mats = torelli_all(dataset)
    g = max(m.dim for m in mats)
    rows = []
    for kind in kinds:
        full = gram_from_matrices(mats, dataset.ids, KernelConfig(kind, "auto", g, seed))
        for rho in ratios:
            g0 = max(1, int(round(rho * g)))
            errs = []
            for b, s in enumerate(_seeds(seed + 1, repeats)):
                cfg = KernelConfig(kind, full.gamma, g0, s)
                errs.append(relative_error(gram_from_matrices(mats, dataset.ids, cfg), full))
            rows.append(
                {
                    "kernel": kind,
                    "ratio": float(rho),
                    "g0": g0,
                    "mean": float(np.mean(errs)),
                    "std": float(np.std(errs)),
                    "gamma": full.gamma,
                }
            )
    return rows


def noise_stability(
    dataset: GraphDataset,
    levels=NOISE_LEVELS,
    kinds=("TTW", "TTE"),
    g0: int | None = None,
    seed: int = 0,
) -> list:
    """Relative Gram error under Unif(0, R) length noise.

    The same per-graph seeds are used at every ``R``, so the noise at level
    ``R`` is ``R`` times a fixed draw. Each row also checks the first-order
    bound ``||dQ|| <= ||M_T||_2^2 ||dL_T|| + ||dL_g||`` with ``M`` held at the
    clean basis (``bound_ok``), and reports how often the bound holds when
    ``Q`` is recomputed from scratch on the noisy graph (``bound_recomputed``).
    """
    clean = torelli_all(dataset)
    graph_seeds = _seeds(seed, len(dataset))
    bases = [t.basis for t in clean]
    mt_norms = [_tree_block_norm(b) for b in bases]
    rows = []
    for R in levels:
        noisy_graphs = [
            perturb_lengths(g, NoiseSpec(R, s)) for g, s in zip(dataset.graphs, graph_seeds)
        ]
        noisy = [torelli_matrix(g, graph_id=i) for g, i in zip(noisy_graphs, dataset.ids)]
        ok_fixed = ok_recomputed = 0
        worst_slack = math.inf
        for t, basis, gn, tn, norm in zip(clean, bases, noisy_graphs, noisy, mt_norms):
            dL = gn.lengths - t.basis.graph.lengths
            bound = _bound(basis, dL, norm)
            dq_fixed = np.linalg.norm(torelli_from_basis(basis, gn.lengths) - t.Q)
            ok_fixed += dq_fixed <= bound * (1 + 1e-12) + 1e-12
            worst_slack = min(worst_slack, bound - dq_fixed)
            if tn.dim == t.dim:
                ok_recomputed += np.linalg.norm(tn.Q - t.Q) <= bound * (1 + 1e-12) + 1e-12
        for kind in kinds:
            cfg = KernelConfig(kind, "auto", g0, seed)
            K = gram_from_matrices(clean, dataset.ids, cfg)
            Kn = gram_from_matrices(noisy, dataset.ids, replace(cfg, gamma=K.gamma, g0=K.config.g0))
            rows.append(
                {
                    "kernel": kind,
                    "R": float(R),
                    "error": relative_error(Kn, K),
                    "bound_ok": int(ok_fixed),
                    "bound_recomputed": int(ok_recomputed),
                    "graphs": len(dataset),
                    "min_slack": float(worst_slack),
                }
            )
    return rows


def _tree_block_norm(basis) -> float:
    M = basis.dense()
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M[:, basis.tree_edges], 2)) if len(basis.tree_edges) else 0.0


def _bound(basis, dL, mt_norm) -> float:
    return mt_norm**2 * float(np.linalg.norm(dL[basis.tree_edges])) + float(
        np.linalg.norm(dL[basis.chords])
    )


def definiteness_sweep(configs, seed: int = 0, kinds=("TTE", "TTW")) -> list:
    """Smallest nonzero Gram eigenvalue for each ``(N, g0)`` in ``configs``.

    Each dataset has ``N`` graphs of genus at most ``g0`` (padding only).
    """
    rows = []
    for k, (N, g0) in enumerate(configs):
        ds = random_dataset(N, g0, _seeds(seed, len(configs))[k])
        mats = torelli_all(ds)
        for kind in kinds:
            K = gram_from_matrices(mats, ds.ids, KernelConfig(kind, "auto", g0, seed))
            lam = np.linalg.eigvalsh(K.values)
            rows.append(
                {
                    "kernel": kind,
                    "N": N,
                    "g0": g0,
                    "min_nonzero": min_nonzero_eigenvalue(K),
                    "min_eig": float(lam[0]),
                    "max_eig": float(lam[-1]),
                }
            )
    return rows


def _best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def runtime_scaling(kind: str, sizes, parameter: float, count: int = 10, seed: int = 0, repeats: int = 3) -> list:
    """Best-of-``repeats`` wall time per suite for the Torelli pass and the TTE Gram."""
    rows = []
    for n in sizes:
        ds = sparsity_suite(SparsitySpec(kind, n, parameter, count, seed))
        t_torelli = _best_time(lambda: torelli_all(ds), repeats)
        t_gram = _best_time(lambda: gram_matrix(ds, KernelConfig("TTE")), repeats)
        rows.append(
            {
                "class": kind,
                "n": n,
                "genus": int(ds.genera()[0]) if len(ds) else 0,
                "torelli_seconds": t_torelli,
                "gram_seconds": t_gram,
            }
        )
    return rows
