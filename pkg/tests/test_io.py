import numpy as np
import pytest

from tmgk import io
from tmgk.dataset import GraphDataset
from tmgk.errors import (
    DuplicateId,
    InconsistentIndicator,
    MetadataMismatch,
    MissingManifest,
    ParseError,
)
from tmgk.graph import build_graph
from tmgk.kernels import KernelConfig, gram_matrix
from tmgk.synth import SparsitySpec, classify_sparsity, random_connected_graph, sparsity_suite
from tmgk.torelli import torelli_matrix


def dataset(N=4):
    graphs = [random_connected_graph(10 + k, 1 + k % 3, k) for k in range(N)]
    return GraphDataset.from_graphs(graphs, labels=[k % 2 for k in range(N)], ids=[f"m/{k}" for k in range(N)])


def test_edgelist_roundtrip_bitwise(tmp_path):
    g = random_connected_graph(20, 5, 0)
    io.write_edgelist(g, tmp_path / "g.edges", comment="two\nlines")
    h = io.read_edgelist(tmp_path / "g.edges")
    assert h == g
    assert np.array_equal(h.lengths, g.lengths)


def test_parse_errors_name_file_and_line():
    with pytest.raises(ParseError) as exc:
        io.parse_edgelist("n 3\n0 1 1.0\n0 5 2.0\n", source="x.edges")
    assert exc.value.file == "x.edges" and exc.value.line == 3
    for text in ["0 1 1.0\n", "n 2\n0 1\n", "n 2\n0 1 -1\n", "n 2\n0 1 abc\n", "", "n x\n"]:
        with pytest.raises(ParseError):
            io.parse_edgelist(text)


def test_truncated_file(tmp_path):
    g = random_connected_graph(10, 2, 0)
    text = io.format_edgelist(g)
    (tmp_path / "t.edges").write_text(text[: len(text) // 2 - 3])
    with pytest.raises(ParseError):
        io.read_edgelist(tmp_path / "t.edges")


def test_edgelist_dataset_roundtrip(tmp_path):
    ds = dataset()
    io.save_edgelist_dataset(ds, tmp_path / "d", units="m")
    back = io.load_edgelist_dataset(tmp_path / "d")
    assert back.ids == ds.ids
    assert back.labels.tolist() == ds.labels.tolist()
    assert all(a == b for a, b in zip(back.graphs, ds.graphs))
    assert len(back) == 4


def test_edgelist_dataset_errors(tmp_path):
    with pytest.raises(MissingManifest):
        io.load_edgelist_dataset(tmp_path)
    io.save_edgelist_dataset(dataset(2), tmp_path / "d")
    manifest = tmp_path / "d" / io.MANIFEST
    text = manifest.read_text()
    manifest.write_text(text + "extra,1,missing.edges\n")
    with pytest.raises(ParseError, match="missing.edges"):
        io.load_edgelist_dataset(tmp_path / "d")
    lines = text.splitlines()
    manifest.write_text("\n".join(lines + [lines[1]]) + "\n")
    with pytest.raises(DuplicateId):
        io.load_edgelist_dataset(tmp_path / "d")


def write_tu(root, name="TOY", attrs=None):
    # graph 1: triangle on nodes 1-3, graph 2: path 4-5-6; pairs listed both ways
    root.mkdir(parents=True, exist_ok=True)
    A = ["1, 2", "2, 1", "2, 3", "3, 2", "3, 1", "1, 3", "4, 5", "5, 4", "5, 6", "6, 5"]
    (root / f"{name}_A.txt").write_text("\n".join(A) + "\n")
    (root / f"{name}_graph_indicator.txt").write_text("1\n1\n1\n2\n2\n2\n")
    (root / f"{name}_graph_labels.txt").write_text("1\n-1\n")
    if attrs is not None:
        (root / f"{name}_edge_attributes.txt").write_text("\n".join(map(str, attrs)) + "\n")


def test_tu_with_attributes(tmp_path, monkeypatch):
    write_tu(tmp_path, attrs=[1.5, 1.5, 2.5, 2.5, 3.5, 3.5, 4.0, 4.0, 0.5, 0.5])
    calls = []
    real = np.random.default_rng

    def counting(*a, **k):
        calls.append(a)
        return real(*a, **k)

    monkeypatch.setattr(np.random, "default_rng", counting)
    ds = io.load_tu_dataset(tmp_path, weight_seed=123)
    assert calls == []
    assert ds.ids == ("1", "2")
    assert ds.labels.tolist() == [1, -1]
    g1, g2 = ds.graphs
    assert g1.edges == [(0, 1, 1.5), (1, 2, 2.5), (0, 2, 3.5)]
    assert g2.edges == [(0, 1, 4.0), (1, 2, 0.5)]
    assert [g.node_count for g in ds.graphs] == [3, 3]


def test_tu_without_attributes_uses_seed(tmp_path):
    write_tu(tmp_path)
    a = io.load_tu_dataset(tmp_path, weight_seed=1)
    b = io.load_tu_dataset(tmp_path, weight_seed=1)
    c = io.load_tu_dataset(tmp_path, weight_seed=2)
    assert a.graphs[0] == b.graphs[0]
    assert a.graphs[0] != c.graphs[0]
    assert a.graphs[0].edge_count == 3
    assert np.all((a.graphs[0].lengths > 0) & (a.graphs[0].lengths < 1))


def test_tu_nonpositive_attributes_fall_back_to_random(tmp_path):
    write_tu(tmp_path, attrs=[0, 0, 2, 2, 3, 3, 4, 4, 5, 5])
    g = io.load_tu_dataset(tmp_path, weight_seed=0).graphs[0]
    assert np.all(g.lengths < 1)


def test_tu_errors(tmp_path):
    write_tu(tmp_path / "a")
    (tmp_path / "a" / "TOY_graph_indicator.txt").write_text("1\n1\n2\n2\n2\n2\n")
    with pytest.raises(InconsistentIndicator):
        io.load_tu_dataset(tmp_path / "a")
    write_tu(tmp_path / "b")
    (tmp_path / "b" / "TOY_graph_indicator.txt").write_text("1\n1\n1\n3\n3\n3\n")
    with pytest.raises(InconsistentIndicator):
        io.load_tu_dataset(tmp_path / "b")
    (tmp_path / "empty").mkdir()
    with pytest.raises(MissingManifest):
        io.load_tu_dataset(tmp_path / "empty")


def test_torelli_roundtrip(tmp_path, golden):
    T = torelli_matrix(random_connected_graph(20, 4, 3), graph_id="x")
    io.save_torelli(T, tmp_path / "q.csv")
    back = io.load_torelli(tmp_path / "q.csv")
    assert np.array_equal(back.Q, T.Q)
    assert back.metadata() == T.metadata()
    io.save_torelli(torelli_matrix(build_graph(2, [(0, 1, 1.0)])), tmp_path / "e.csv")
    assert io.load_torelli(tmp_path / "e.csv").Q.shape == (0, 0)


def test_gram_roundtrip_and_mismatch(tmp_path):
    K = gram_matrix(dataset(5), KernelConfig("TTW", seed=4))
    io.save_gram(K, tmp_path / "k.csv")
    back = io.load_gram(tmp_path / "k.csv")
    assert np.array_equal(back.values, K.values)
    assert back.ids == K.ids
    assert back.metadata() == K.metadata()
    meta = io.sidecar_path(tmp_path / "k.csv")
    meta.write_text(meta.read_text().replace('"n": 5', '"n": 6'))
    with pytest.raises(MetadataMismatch):
        io.load_gram(tmp_path / "k.csv")


def test_read_labels_and_reports(tmp_path):
    io.save_edgelist_dataset(dataset(3), tmp_path / "d")
    ids, labels = io.read_labels(tmp_path / "d" / io.MANIFEST)
    assert ids == ["m/0", "m/1", "m/2"] and labels.tolist() == [0, 1, 0]
    io.write_rows([{"a": 1, "b": 0.1}, {"a": 2, "c": "x"}], tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines() == ["a,b,c", "1,0.1,", "2,,x"]


def test_tu_fixture_statistics(tmp_path):
    write_tu(tmp_path)
    rep = classify_sparsity(io.load_tu_dataset(tmp_path))
    # triangle (genus 1) and path (genus 0), three nodes each
    assert rep.mean_nodes == 3.0 and rep.mean_genus == 0.5


def test_sparsity_suite_roundtrip(tmp_path):
    ds = sparsity_suite(SparsitySpec("semi_sparse", 12, 1.0, 4, seed=9))
    io.save_edgelist_dataset(ds, tmp_path / "s")
    back = io.load_edgelist_dataset(tmp_path / "s")
    assert back.ids == ds.ids and back.labels.tolist() == ds.labels.tolist()
    assert all(a == b for a, b in zip(back.graphs, ds.graphs))


def test_truncated_gram(tmp_path):
    K = gram_matrix(dataset(4), KernelConfig("TTE"))
    io.save_gram(K, tmp_path / "k.csv")
    lines = (tmp_path / "k.csv").read_text().splitlines()
    (tmp_path / "k.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ParseError):
        io.load_gram(tmp_path / "k.csv")
    (tmp_path / "k.csv").write_text("\n".join(lines[:-1] + [lines[-1][: len(lines[-1]) // 2]]) + "\n")
    with pytest.raises(ParseError):
        io.load_gram(tmp_path / "k.csv")
