"""Command-line interface: ``tmgk <command> ...``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from tmgk import io
from tmgk.errors import DimensionMismatch, TmgkError
from tmgk.experiments import runtime_scaling
from tmgk.kernels import KernelConfig, gram_matrix, min_nonzero_eigenvalue
from tmgk.learn import cross_validate, kernel_pca
from tmgk.synth import NoiseSpec, SparsitySpec, classify_sparsity, perturb_lengths, sparsity_suite
from tmgk.torelli import MODELS, ORIENTATIONS, torelli_matrix


def _gamma(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("gamma must be positive")
    return value


def load_dataset(path, weight_seed: int = 0):
    """Edge-list directory (with ``labels.csv``) or TU-format directory."""
    root = Path(path)
    if (root / io.MANIFEST).is_file():
        return io.load_edgelist_dataset(root)
    if root.is_dir() and any(root.glob("*_A.txt")):
        return io.load_tu_dataset(root, weight_seed)
    return io.load_edgelist_dataset(root)  # raises MissingManifest


def cmd_torelli(args) -> int:
    g = io.read_edgelist(args.graph)
    T = torelli_matrix(
        g,
        model=args.model,
        orientation=args.orientation,
        jitter_seed=args.jitter_seed,
        graph_id=args.id or Path(args.graph).stem,
    )
    io.ensure_parent(args.out)
    io.save_torelli(T, args.out)
    print(f"genus {T.genus} -> {args.out}")
    return 0


def cmd_gram(args) -> int:
    ds = load_dataset(args.dataset, args.weight_seed)
    cfg = KernelConfig(
        kind=args.kernel,
        gamma=args.gamma,
        g0=args.g0,
        seed=args.seed,
        clip=args.clip,
        jitter_seed=args.jitter_seed,
    )
    K = gram_matrix(ds, cfg)
    io.ensure_parent(args.out)
    io.save_gram(K, args.out)
    print(f"{K.config.kind} gram {len(K)}x{len(K)} gamma={K.gamma!r} g0={K.config.g0} -> {args.out}")
    return 0


def _labels_for(K, path):
    ids, labels = io.read_labels(path)
    lookup = dict(zip(ids, labels.tolist()))
    missing = [i for i in K.ids if i not in lookup]
    if missing:
        raise DimensionMismatch(f"labels file has no entry for ids {missing[:5]}")
    return np.array([lookup[i] for i in K.ids], dtype=np.int64)


def cmd_classify(args) -> int:
    K = io.load_gram(args.gram)
    labels = _labels_for(K, args.labels)
    rep = cross_validate(K, labels, folds=args.folds, C=args.C, seed=args.seed)
    if args.out:
        io.ensure_parent(args.out)
        io.write_cv_report(rep, args.out)
    print(f"accuracy {rep.mean:.4f} +/- {rep.std:.4f} over {args.folds} folds")
    return 0


def cmd_pca(args) -> int:
    K = io.load_gram(args.gram)
    X = kernel_pca(K, args.dims)
    io.ensure_parent(args.out)
    io.write_embedding(K.ids, X, args.out)
    print(f"{X.shape[0]} points x {X.shape[1]} dims -> {args.out}")
    return 0


def cmd_synth(args) -> int:
    spec = SparsitySpec(args.cls, args.n, args.param, args.count, args.seed, args.label)
    ds = sparsity_suite(spec)
    io.save_edgelist_dataset(ds, args.out)
    print(f"{len(ds)} graphs of genus {spec.genus} -> {args.out}")
    return 0


def cmd_perturb(args) -> int:
    from tmgk.dataset import GraphDataset
    from tmgk.kernels import graph_seed

    ds = load_dataset(args.dataset, args.weight_seed)
    graphs = [
        perturb_lengths(g, NoiseSpec(args.R, graph_seed(args.seed, gid)))
        for g, gid in zip(ds.graphs, ds.ids)
    ]
    io.save_edgelist_dataset(GraphDataset(tuple(graphs), ds.labels, ds.ids), args.out)
    print(f"{len(graphs)} graphs perturbed with R={args.R} -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    if args.suite != "sparsity":
        raise TmgkError(f"unknown suite {args.suite!r}")
    defaults = {"sparse": ([500, 1000, 2000, 4000], 10.0), "semi_sparse": ([200, 400, 800], 1.0),
                "dense": ([50, 100, 200], 0.1)}
    classes = [args.cls] if args.cls else list(defaults)
    rows = []
    for cls in classes:
        sizes, param = defaults[cls]
        rows += runtime_scaling(
            cls, args.sizes or sizes, args.param or param, args.count, args.seed, args.repeats
        )
    io.ensure_parent(args.out)
    io.write_rows(rows, args.out)
    for r in rows:
        print(f"{r['class']:<12} n={r['n']:<6} g={r['genus']:<6} torelli {r['torelli_seconds']:.4f}s  gram {r['gram_seconds']:.4f}s")
    return 0


def cmd_check(args) -> int:
    K = io.load_gram(args.gram)
    print(repr(min_nonzero_eigenvalue(K, args.tol)))
    return 0


def cmd_info(args) -> int:
    ds = load_dataset(args.dataset, args.weight_seed)
    rep = classify_sparsity(ds)
    print(f"graphs {len(ds)}")
    print(f"mean_nodes {rep.mean_nodes:.4f}")
    print(f"mean_genus {rep.mean_genus:.4f}")
    print(f"log_ratio {rep.log_ratio:.4f}")
    print(f"sparsity {rep.label}")
    if args.out:
        io.ensure_parent(args.out)
        io.write_rows([{"graphs": len(ds), "mean_nodes": rep.mean_nodes, "mean_genus": rep.mean_genus,
                        "log_ratio": rep.log_ratio, "sparsity": rep.label}], args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tmgk", description="Tropical Torelli matrices and metric graph kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("torelli", help="graph edge list -> Torelli matrix CSV")
    s.add_argument("graph")
    s.add_argument("--out", required=True)
    s.add_argument("--id")
    s.add_argument("--model", choices=MODELS, default="minimal")
    s.add_argument("--orientation", choices=ORIENTATIONS, default="canonical")
    s.add_argument("--jitter-seed", type=int)
    s.set_defaults(func=cmd_torelli)

    s = sub.add_parser("gram", help="dataset -> Gram matrix CSV")
    s.add_argument("--dataset", required=True)
    s.add_argument("--kernel", choices=["tte", "ttw", "TTE", "TTW"], default="tte")
    s.add_argument("--gamma", type=_gamma, default="auto")
    s.add_argument("--g0", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--clip", action="store_true")
    s.add_argument("--jitter-seed", type=int)
    s.add_argument("--weight-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gram)

    s = sub.add_parser("classify", help="k-fold C-SVM accuracy on a Gram matrix")
    s.add_argument("--gram", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("pca", help="kernel PCA embedding")
    s.add_argument("--gram", required=True)
    s.add_argument("--dims", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_pca)

    s = sub.add_parser("synth", help="generate a synthetic sparsity suite")
    s.add_argument("--class", dest="cls", choices=["sparse", "semi_sparse", "semi-sparse", "dense"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--param", type=float, required=True)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--label", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("perturb", help="add Unif(0, R) noise to every edge length")
    s.add_argument("--dataset", required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weight-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("bench", help="runtime of the Torelli pass and TTE Gram by sparsity class")
    s.add_argument("--suite", default="sparsity")
    s.add_argument("--class", dest="cls", choices=["sparse", "semi_sparse", "dense"])
    s.add_argument("--sizes", type=int, nargs="+")
    s.add_argument("--param", type=float)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("check", help="smallest nonzero eigenvalue of a Gram matrix")
    s.add_argument("--gram", required=True)
    s.add_argument("--tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("info", help="dataset statistics and sparsity class")
    s.add_argument("--dataset", required=True)
    s.add_argument("--weight-seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TmgkError, OSError) as exc:
        print(f"tmgk {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
