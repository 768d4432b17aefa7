"""Reading and writing graphs, datasets, Torelli and Gram matrices, and reports.

Floats are written with ``repr`` so every value round-trips bit for bit.
Matrix files carry a JSON sidecar next to them (``<file>.meta.json``).
"""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from tmgk.dataset import GraphDataset
from tmgk.errors import (
    DuplicateId,
    InconsistentIndicator,
    MetadataMismatch,
    MissingManifest,
    NodeIdOutOfRange,
    NonPositiveLength,
    ParseError,
)
from tmgk.graph import WeightedGraph
from tmgk.kernels import GramMatrix, KernelConfig
from tmgk.torelli import TorelliMatrix

MANIFEST = "labels.csv"


def _num(x: float) -> str:
    return repr(float(x))


def sidecar_path(path) -> Path:
    return Path(f"{path}.meta.json")


# -- single graphs --------------------------------------------------------------


def format_edgelist(g: WeightedGraph, comment: str | None = None) -> str:
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines.append(f"n {g.node_count}")
    lines += [f"{u} {v} {_num(w)}" for u, v, w in zip(g.tails.tolist(), g.heads.tolist(), g.lengths)]
    return "\n".join(lines) + "\n"


def write_edgelist(g: WeightedGraph, path, comment: str | None = None) -> None:
    Path(path).write_text(format_edgelist(g, comment))


def parse_edgelist(text: str, source="<string>") -> WeightedGraph:
    n = None
    tails, heads, lengths = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ParseError(source, lineno, f"expected 'n <node_count>', got {line!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(source, lineno, f"bad node count {parts[1]!r}") from None
            if n < 0:
                raise ParseError(source, lineno, f"negative node count {n}")
            continue
        if len(parts) != 3:
            raise ParseError(source, lineno, f"expected 'u v length', got {line!r}")
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(source, lineno, f"cannot parse edge {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(source, lineno, f"node id out of range [0, {n}): {line!r}")
        if not (w > 0 and math.isfinite(w)):
            raise ParseError(source, lineno, f"edge length must be positive and finite: {line!r}")
        tails.append(u)
        heads.append(v)
        lengths.append(w)
    if n is None:
        raise ParseError(source, None, "missing 'n <node_count>' header")
    try:
        return WeightedGraph(n, tails, heads, lengths)
    except (NodeIdOutOfRange, NonPositiveLength) as exc:  # pragma: no cover - caught above
        raise ParseError(source, None, str(exc)) from exc


def read_edgelist(path) -> WeightedGraph:
    return parse_edgelist(Path(path).read_text(), source=str(path))


# -- edge-list datasets ------------------------------------------------------------


def _safe_name(graph_id: str) -> str:
    keep = "".join(c if c.isalnum() or c in "-_." else "_" for c in graph_id)
    return keep or "graph"


def save_edgelist_dataset(ds: GraphDataset, path, units: str | None = None) -> Path:
    """Write one edge-list file per graph plus the ``labels.csv`` manifest."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    used = set()
    rows = []
    for g, label, gid in zip(ds.graphs, ds.labels.tolist(), ds.ids):
        name = _safe_name(gid)
        stem, k = name, 1
        while name in used:
            name = f"{stem}_{k}"
            k += 1
        used.add(name)
        fname = f"{name}.edges"
        write_edgelist(g, root / fname)
        rows.append((gid, label, fname))
    with open(root / MANIFEST, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label", "file"] + (["units"] if units else []))
        for r in rows:
            w.writerow(list(r) + ([units] if units else []))
    return root


def load_edgelist_dataset(path) -> GraphDataset:
    root = Path(path)
    manifest = root / MANIFEST
    if not manifest.is_file():
        raise MissingManifest(f"no {MANIFEST} in {root}")
    graphs, labels, ids = [], [], []
    seen = {}
    with open(manifest, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["id", "label", "file"]:
            raise ParseError(manifest, 1, f"expected header 'id,label,file', got {header!r}")
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise ParseError(manifest, lineno, f"expected id,label,file, got {row!r}")
            gid, label, fname = row[0].strip(), row[1].strip(), row[2].strip()
            if gid in seen:
                raise DuplicateId(f"{manifest}:{lineno}: id {gid!r} already used on line {seen[gid]}")
            seen[gid] = lineno
            try:
                label = int(label)
            except ValueError:
                raise ParseError(manifest, lineno, f"label must be an integer, got {label!r}") from None
            gpath = root / fname
            if not gpath.is_file():
                raise ParseError(manifest, lineno, f"graph file {fname!r} not found")
            graphs.append(read_edgelist(gpath))
            labels.append(label)
            ids.append(gid)
    return GraphDataset(tuple(graphs), labels, tuple(ids))


# -- TU benchmark format ----------------------------------------------------------------


def _read_rows(path, width=None):
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if width is not None and len(parts) < width:
                raise ParseError(path, lineno, f"expected {width} comma-separated values, got {line!r}")
            rows.append((lineno, parts))
    return rows


def _tu_prefix(root: Path, name: str | None) -> str:
    if name is not None:
        return name
    found = sorted(p.name[: -len("_A.txt")] for p in root.glob("*_A.txt"))
    if len(found) != 1:
        raise MissingManifest(f"expected exactly one *_A.txt in {root}, found {found}")
    return found[0]


def load_tu_dataset(path, weight_seed: int = 0, name: str | None = None) -> GraphDataset:
    """Read the TU benchmark layout, dropping node and edge labels.

    Each undirected pair is kept once (first occurrence). Lengths come from
    the first column of ``DS_edge_attributes.txt`` when that file exists and
    every value is positive; otherwise all lengths are drawn from
    Unif(0, 1) with ``weight_seed``.
    """
    root = Path(path)
    ds = _tu_prefix(root, name)
    f_a = root / f"{ds}_A.txt"
    f_ind = root / f"{ds}_graph_indicator.txt"
    f_lab = root / f"{ds}_graph_labels.txt"
    f_att = root / f"{ds}_edge_attributes.txt"
    for f in (f_a, f_ind, f_lab):
        if not f.is_file():
            raise MissingManifest(f"missing {f.name} in {root}")

    indicator = []
    for lineno, parts in _read_rows(f_ind, 1):
        try:
            indicator.append(int(parts[0]))
        except ValueError:
            raise ParseError(f_ind, lineno, f"bad graph index {parts[0]!r}") from None
    indicator = np.asarray(indicator, dtype=np.int64)
    graph_labels = []
    for lineno, parts in _read_rows(f_lab, 1):
        try:
            graph_labels.append(int(float(parts[0])))
        except ValueError:
            raise ParseError(f_lab, lineno, f"bad graph label {parts[0]!r}") from None
    n_graphs = len(graph_labels)
    if indicator.size and (indicator.min() < 1 or indicator.max() > n_graphs):
        raise InconsistentIndicator(
            f"graph indicator values must lie in [1, {n_graphs}], got [{indicator.min()}, {indicator.max()}]"
        )
    if indicator.size and np.any(np.diff(indicator) < 0):
        raise InconsistentIndicator("graph indicator must be non-decreasing (nodes grouped by graph)")
    counts = np.bincount(indicator - 1, minlength=n_graphs) if indicator.size else np.zeros(n_graphs, int)
    offsets = np.r_[0, np.cumsum(counts)[:-1]]

    attrs = None
    if f_att.is_file():
        attrs = []
        for lineno, parts in _read_rows(f_att, 1):
            try:
                attrs.append(float(parts[0]))
            except ValueError:
                raise ParseError(f_att, lineno, f"bad edge attribute {parts[0]!r}") from None

    per_graph = [dict() for _ in range(n_graphs)]
    order = [[] for _ in range(n_graphs)]
    rows = _read_rows(f_a, 2)
    if attrs is not None and len(attrs) != len(rows):
        raise ParseError(f_att, None, f"{len(attrs)} attributes for {len(rows)} edges")
    for k, (lineno, parts) in enumerate(rows):
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f_a, lineno, f"bad node pair {parts[:2]!r}") from None
        if not (1 <= i <= len(indicator) and 1 <= j <= len(indicator)):
            raise ParseError(f_a, lineno, f"node index out of range 1..{len(indicator)}")
        gi, gj = indicator[i - 1], indicator[j - 1]
        if gi != gj:
            raise InconsistentIndicator(f"{f_a}:{lineno}: edge ({i}, {j}) joins graphs {gi} and {gj}")
        key = (min(i, j), max(i, j))
        slot = per_graph[gi - 1]
        if key not in slot:
            slot[key] = attrs[k] if attrs is not None else None
            order[gi - 1].append(key)

    use_attrs = attrs is not None and all(v > 0 and math.isfinite(v) for v in attrs)
    rng = None
    graphs = []
    for gk in range(n_graphs):
        keys = order[gk]
        base = offsets[gk] + 1
        tails = [a - base for a, _ in keys]
        heads = [b - base for _, b in keys]
        if use_attrs:
            lengths = [per_graph[gk][key] for key in keys]
        else:
            if rng is None:
                rng = np.random.default_rng(weight_seed)
            lengths = rng.random(len(keys))
            while np.any(lengths <= 0):
                lengths = np.where(lengths > 0, lengths, rng.random(len(keys)))
        graphs.append(WeightedGraph(int(counts[gk]), tails, heads, lengths))
    ids = tuple(str(k + 1) for k in range(n_graphs))
    return GraphDataset(tuple(graphs), graph_labels, ids)


# -- matrices ------------------------------------------------------------------------


def _write_matrix_rows(fh, A):
    w = csv.writer(fh, lineterminator="\n")
    for row in np.asarray(A):
        w.writerow([_num(x) for x in row])


def _read_matrix_rows(path, lines, expect_cols):
    out = []
    for lineno, row in lines:
        if len(row) != expect_cols:
            raise ParseError(path, lineno, f"expected {expect_cols} values, got {len(row)}")
        try:
            out.append([float(x) for x in row])
        except ValueError:
            raise ParseError(path, lineno, "non-numeric entry") from None
    return np.asarray(out, dtype=np.float64).reshape(len(out), expect_cols)


def _write_meta(path, meta: dict) -> None:
    sidecar_path(path).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def _read_meta(path) -> dict:
    p = sidecar_path(path)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(p, exc.lineno, f"invalid metadata: {exc.msg}") from None


def save_torelli(T: TorelliMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        _write_matrix_rows(fh, T.Q)
    _write_meta(path, T.metadata())


def load_torelli(path) -> TorelliMatrix:
    meta = _read_meta(path)
    with open(path, newline="") as fh:
        lines = [(k, r) for k, r in enumerate(csv.reader(fh), 1) if r]
    g = int(meta.get("genus", len(lines)))
    if len(lines) != g:
        raise ParseError(path, len(lines) or None, f"expected {g} rows, found {len(lines)}")
    Q = _read_matrix_rows(path, lines, g)
    return TorelliMatrix(
        Q=Q,
        genus=g,
        graph_id=meta.get("graph_id"),
        generic=bool(meta.get("generic", True)),
        jitter_seed=meta.get("jitter_seed"),
        model=meta.get("model", "minimal"),
        orientation=meta.get("orientation", "canonical"),
        block_sizes=tuple(meta.get("block_sizes", ())),
        branch_ties=int(meta.get("branch_ties", 0)),
    )


def save_gram(K: GramMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(K.ids)
        _write_matrix_rows(fh, K.values)
    meta = K.metadata()
    meta["n"] = len(K)
    _write_meta(path, meta)


def load_gram(path) -> GramMatrix:
    meta = _read_meta(path)
    with open(path, newline="") as fh:
        rows = [(k, r) for k, r in enumerate(csv.reader(fh), 1) if r]
    if not rows:
        raise ParseError(path, None, "empty file")
    ids = rows[0][1]
    n = len(ids)
    if "n" in meta and int(meta["n"]) != n:
        raise MetadataMismatch(f"{path}: sidecar says n={meta['n']}, header has {n} ids")
    body = rows[1:]
    if len(body) != n:
        raise ParseError(path, body[-1][0] if body else 1, f"expected {n} data rows, found {len(body)}")
    values = _read_matrix_rows(path, body, n)
    try:
        config = KernelConfig(
            kind=meta["kind"],
            gamma=meta["gamma"],
            g0=meta.get("g0"),
            seed=int(meta.get("seed", 0)),
            clip=bool(meta.get("clip", False)),
        )
    except KeyError as exc:
        raise MetadataMismatch(f"{sidecar_path(path)}: missing field {exc.args[0]!r}") from None
    return GramMatrix(values, config, ids)


# -- reports ---------------------------------------------------------------------------


def write_cv_report(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "accuracy"])
        for k, a in enumerate(report.accuracies.tolist()):
            w.writerow([k, _num(a)])
        fh.write(f"# mean={_num(report.mean)} std={_num(report.std)} seed={report.seed}\n")


def write_embedding(ids, X, path) -> None:
    X = np.asarray(X)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"x{k + 1}" for k in range(X.shape[1])])
        for gid, row in zip(ids, X):
            w.writerow([gid] + [_num(x) for x in row])


def write_rows(rows, path) -> None:
    """CSV of dict rows; columns in first-seen key order."""
    rows = list(rows)
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _num(v) if isinstance(v, float) else v for k, v in r.items()})


def read_labels(path) -> tuple[list, np.ndarray]:
    """``id,label`` CSV (extra columns ignored), e.g. a dataset manifest."""
    ids, labels = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or [h.strip() for h in header[:2]] != ["id", "label"]:
            raise ParseError(path, 1, f"expected header starting 'id,label', got {header!r}")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                ids.append(row[0].strip())
                labels.append(int(row[1]))
            except (IndexError, ValueError):
                raise ParseError(path, lineno, f"bad row {row!r}") from None
    return ids, np.asarray(labels, dtype=np.int64)


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
