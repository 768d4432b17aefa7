"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_backends.py [--repeats 5] [--out bench.csv]

Times each kernel on the same inputs with both backends, then the end-to-end
Torelli pass and an SVM fit with the active module swapped in.
"""
import argparse
import time
from contextlib import contextmanager

import numpy as np

import tmgk.graph
import tmgk.learn
import tmgk.torelli
from tmgk._backend import BACKENDS
from tmgk.graph import minimum_spanning_forest
from tmgk.io import write_rows
from tmgk.learn import svm_train
from tmgk.synth import random_connected_graph
from tmgk.torelli import torelli_matrix


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


@contextmanager
def using(mod):
    saved = [(m, m.core) for m in (tmgk.graph, tmgk.torelli, tmgk.learn)]
    for m, _ in saved:
        m.core = mod
    try:
        yield
    finally:
        for m, c in saved:
            m.core = c


def cases(n, g, seed=0):
    G = random_connected_graph(n, g, seed)
    order = np.argsort(G.lengths).astype(np.int64)
    f = minimum_spanning_forest(G)
    tree = np.flatnonzero(f.in_tree).astype(np.int64)
    chords = np.flatnonzero(~f.in_tree)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((400, 5))
    K = np.exp(-0.2 * ((X[:, None] - X[None]) ** 2).sum(-1))
    y = np.where(X[:, 0] + 0.5 * rng.standard_normal(400) > 0, 1.0, -1.0)
    Q = np.outer(y, y) * K
    return {
        "kruskal_forest": lambda k: k.kruskal_forest(n, G.tails, G.heads, order),
        "component_minima": lambda k: k.component_minima(n, G.tails, G.heads),
        "root_forest": lambda k: k.root_forest(n, G.tails, G.heads, tree, np.array([0])),
        "tree_flips": lambda k: k.tree_flips(n, G.tails, G.heads, G.lengths, f.in_tree),
        "tree_paths": lambda k: k.tree_paths(f.parent, f.parent_edge, f.depth, G.heads[chords], G.tails[chords]),
        "smo_solve": lambda k: k.smo_solve(Q, y, 1.0, 1e-3, 10000, False),
        "torelli_matrix": lambda k: _with(k, lambda: torelli_matrix(G)),
        "svm_train": lambda k: _with(k, lambda: svm_train(K, y)),
    }


def _with(mod, fn):
    with using(mod):
        return fn()


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--genus", type=int, default=500)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out")
    args = p.parse_args(argv)
    if "cython" not in BACKENDS:
        print("compiled extension not available; timing the Python backend only")
    rows = []
    for name, fn in cases(args.n, args.genus).items():
        row = {"kernel": name}
        for backend, mod in sorted(BACKENDS.items()):
            row[f"{backend}_seconds"] = best_of(lambda: fn(mod), args.repeats)
        if "cython" in BACKENDS:
            row["speedup"] = row["python_seconds"] / row["cython_seconds"]
        rows.append(row)
        extra = f"  x{row['speedup']:.1f}" if "speedup" in row else ""
        times = "  ".join(f"{b} {row[f'{b}_seconds'] * 1e3:9.3f} ms" for b in sorted(BACKENDS))
        print(f"{name:<18}{times}{extra}")
    if args.out:
        write_rows(rows, args.out)


if __name__ == "__main__":
    main()
