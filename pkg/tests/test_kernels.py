import numpy as np
import pytest

from tmgk.dataset import GraphDataset
from tmgk.errors import DimensionMismatch, InvalidParameters, NotPsd
from tmgk.graph import random_refinement
from tmgk.kernels import (
    GramMatrix,
    KernelConfig,
    gram_from_matrices,
    gram_matrix,
    graph_seed,
    kernel_value,
    min_nonzero_eigenvalue,
    pairwise_sq_distances,
    spectrum_clip,
    thread_count,
)
from tmgk.psd import bures_wasserstein, pad
from tmgk.synth import random_connected_graph

from conftest import random_graph


def small_dataset(N=12, seed=0):
    rng = np.random.default_rng(seed)
    graphs = [random_connected_graph(int(rng.integers(8, 20)), int(rng.integers(1, 7)), k) for k in range(N)]
    return GraphDataset.from_graphs(graphs, labels=rng.integers(0, 2, N), ids=[f"G{k}" for k in range(N)])


def test_config_validation():
    assert KernelConfig("ttw").kind == "TTW"
    with pytest.raises(InvalidParameters):
        KernelConfig("rbf")
    with pytest.raises(InvalidParameters):
        KernelConfig(gamma=0.0)
    with pytest.raises(InvalidParameters):
        KernelConfig(gamma="median")
    with pytest.raises(InvalidParameters):
        KernelConfig(g0=0)


def test_kernel_value_examples():
    a, b = pad([[4.0]], 1), pad([[9.0]], 1)
    assert kernel_value(a, b, KernelConfig("TTE", 1.0)) == pytest.approx(np.exp(-25))
    assert kernel_value(a, b, KernelConfig("TTW", 1.0)) == pytest.approx(np.exp(-1))
    assert kernel_value(a, a, KernelConfig("TTW", 1.0)) == 1.0
    with pytest.raises(InvalidParameters):
        kernel_value(a, b, KernelConfig("TTE"))
    with pytest.raises(DimensionMismatch):
        kernel_value(pad([[4.0]], 2), b, KernelConfig("TTE", 1.0))


def test_single_graph_gram():
    ds = small_dataset(1)
    for kind in ("TTE", "TTW"):
        assert gram_matrix(ds, KernelConfig(kind)).values.tolist() == [[1.0]]


def test_refinement_gives_all_ones():
    g = random_connected_graph(15, 4, 1)
    ds = GraphDataset.from_graphs([g, random_refinement(g, 9, 2)])
    for kind in ("TTE", "TTW"):
        K = gram_matrix(ds, KernelConfig(kind, 1.0))
        assert np.allclose(K.values, 1.0, atol=1e-12)


def test_kernel_refinement_invariance_against_test_set():
    rng = np.random.default_rng(3)
    others = [random_connected_graph(12, 3, s) for s in range(5)]
    for _ in range(5):
        g = random_graph(rng, 12, 3)
        r = random_refinement(g, int(rng.integers(1, 20)), int(rng.integers(2**31)))
        for kind in ("TTE", "TTW"):
            cfg = KernelConfig(kind, 0.3, g0=3)
            K1 = gram_matrix(GraphDataset.from_graphs([g] + others), cfg).values
            K2 = gram_matrix(GraphDataset.from_graphs([r] + others), cfg).values
            assert np.max(np.abs(K1[0] - K2[0])) <= 1e-9


def test_diagonal_tte_assembly_oracle():
    mats = [np.diag([1.0, 2.0]), np.diag([3.0, 1.0]), np.diag([0.5, 0.5])]
    K = gram_from_matrices(mats, ["a", "b", "c"], KernelConfig("TTE", 1.0))
    for i in range(3):
        for j in range(3):
            assert K.values[i, j] == pytest.approx(kernel_value(mats[i], mats[j], KernelConfig("TTE", 1.0)))


def test_ttw_assembly_matches_pairwise_bw():
    rng = np.random.default_rng(4)
    mats = []
    for _ in range(6):
        A = rng.standard_normal((4, 4))
        mats.append(A @ A.T)
    sq = pairwise_sq_distances(mats, "TTW")
    for i in range(6):
        for j in range(6):
            assert sq[i, j] == pytest.approx(bures_wasserstein(mats[i], mats[j]) ** 2, abs=1e-10)


def test_gram_properties():
    ds = small_dataset(15)
    for kind in ("TTE", "TTW"):
        K = gram_matrix(ds, KernelConfig(kind))
        v = K.values
        assert np.array_equal(v, v.T)
        assert np.all(np.diag(v) == 1.0)
        assert np.all((v > 0) & (v <= 1.0))
        assert K.ids == ds.ids
        assert K.config.g0 == ds.genera().max()
        assert K.gamma > 0
        meta = K.metadata()
        assert meta["kind"] == kind and meta["gamma"] == K.gamma


def test_auto_gamma_is_inverse_median():
    mats = [np.diag([1.0]), np.diag([2.0]), np.diag([4.0])]
    K = gram_from_matrices(mats, "abc", KernelConfig("TTE"))
    assert K.gamma == pytest.approx(1 / 4.0)  # squared distances 1, 9, 4


def test_tte_gram_is_psd():
    ds = small_dataset(50, seed=5)
    K = gram_matrix(ds, KernelConfig("TTE", g0=40))
    assert min_nonzero_eigenvalue(K) > -1e-6
    lam = np.linalg.eigvalsh(K.values)
    assert lam[0] >= -1e-6 * lam[-1]


@pytest.mark.parametrize("kind", ["TTE", "TTW"])
@pytest.mark.parametrize("g0", [None, 2])
def test_permutation_equivariance(kind, g0):
    ds = small_dataset(10, seed=6)
    cfg = KernelConfig(kind, 0.5, g0=g0, seed=3)
    K = gram_matrix(ds, cfg).values
    perm = np.random.default_rng(7).permutation(len(ds))
    Kp = gram_matrix(ds.subset(perm), cfg).values
    assert np.array_equal(Kp, K[np.ix_(perm, perm)])


def test_graph_seed_stable():
    assert graph_seed(0, "a") == graph_seed(0, "a")
    assert graph_seed(0, "a") != graph_seed(1, "a")
    assert graph_seed(0, "a") != graph_seed(0, "b")


def test_thread_count_and_determinism(monkeypatch):
    ds = small_dataset(12, seed=8)
    monkeypatch.setenv("TMGK_THREADS", "1")
    assert thread_count() == 1
    K1 = gram_matrix(ds, KernelConfig("TTW", g0=3)).values
    monkeypatch.setenv("TMGK_THREADS", "4")
    assert thread_count() == 4
    K4 = gram_matrix(ds, KernelConfig("TTW", g0=3)).values
    assert np.array_equal(K1, K4)
    monkeypatch.setenv("TMGK_THREADS", "many")
    with pytest.raises(InvalidParameters):
        thread_count()


def test_min_nonzero_eigenvalue_examples():
    assert min_nonzero_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert min_nonzero_eigenvalue(np.ones((2, 2))) == pytest.approx(2.0)
    assert min_nonzero_eigenvalue(np.zeros((2, 2))) == 0.0


def test_spectrum_clip():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((5, 5))
    P = A @ A.T
    d = np.sqrt(np.diag(P))
    C = P / np.outer(d, d)
    assert np.max(np.abs(spectrum_clip(C) - C)) <= 1e-10
    # diag(1, -0.1): projection gives diag(1, 0); the zero diagonal is left as is
    assert np.allclose(spectrum_clip(np.diag([1.0, -0.1])), np.diag([1.0, 0.0]))
    K = GramMatrix(np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]), KernelConfig("TTW", 1.0), "abc")
    clipped = spectrum_clip(K)
    assert clipped.config.clip
    assert np.linalg.eigvalsh(clipped.values)[0] >= -1e-12
    assert np.allclose(np.diag(clipped.values), 1.0)


def test_clip_flag_in_config():
    ds = small_dataset(10, seed=10)
    K = gram_matrix(ds, KernelConfig("TTW", g0=2, clip=True))
    assert K.config.clip
    assert np.linalg.eigvalsh(K.values)[0] >= -1e-10


def test_gram_rejects_indefinite_ttw_input():
    with pytest.raises(NotPsd):
        gram_from_matrices([np.eye(2), np.diag([1.0, -1.0])], "ab", KernelConfig("TTW", 1.0))
