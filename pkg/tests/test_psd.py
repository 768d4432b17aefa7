import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from tmgk.errors import BoundNotSmaller, DimensionExceedsBound, DimensionMismatch, NotPsd
from tmgk.psd import (
    PsdMatrix,
    bures_wasserstein,
    bures_wasserstein_sq,
    frobenius_dist,
    pad,
    procrustes_oracle,
    psd_factor,
    reduce_to,
    sqrt_psd,
    subsample_principal,
)

from conftest import GOLDEN_Q


def wishart(rng, d, rank=None):
    A = rng.standard_normal((d, rank or d))
    return A @ A.T


def test_pad():
    assert pad(np.array([[6.0]]), 2).values.tolist() == [[6, 0], [0, 0]]
    assert np.array_equal(pad(GOLDEN_Q, 3).values, GOLDEN_Q)
    P = pad(GOLDEN_Q, 5)
    assert P.effective_rank == 3
    lam = np.linalg.eigvalsh(P.values)
    assert np.allclose(lam, np.r_[0, 0, np.linalg.eigvalsh(GOLDEN_Q)], atol=1e-12)
    with pytest.raises(DimensionExceedsBound):
        pad(GOLDEN_Q, 2)


def test_subsample_principal():
    P, plan = subsample_principal(GOLDEN_Q, 2, seed=1)
    i = list(plan.index_set)
    assert plan.mode == "subsample" and len(i) == 2 and i == sorted(i)
    assert np.array_equal(P.values, GOLDEN_Q[np.ix_(i, i)])
    P2, plan2 = subsample_principal(GOLDEN_Q, 2, seed=1)
    assert plan2.index_set == plan.index_set
    # {0, 2} gives the documented submatrix
    assert GOLDEN_Q[np.ix_([0, 2], [0, 2])].tolist() == [[6, 2], [2, 20]]
    with pytest.raises(BoundNotSmaller):
        subsample_principal(GOLDEN_Q, 3, seed=0)


def test_reduce_to_dispatch():
    assert reduce_to(GOLDEN_Q, 4, 0)[1].mode == "pad"
    assert reduce_to(GOLDEN_Q, 2, 0)[1].mode == "subsample"


def test_subsample_interlacing():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = int(rng.integers(2, 10))
        Q = wishart(rng, d) + 0.1 * np.eye(d)
        P, _ = subsample_principal(Q, int(rng.integers(1, d)), int(rng.integers(2**31)))
        assert np.linalg.eigvalsh(P.values)[0] >= np.linalg.eigvalsh(Q)[0] - 1e-12


def best_principal_submatrix(Q, k):
    """Exhaustive maximizer of sum |Q_ij|^2 over k x k principal submatrices."""
    best = max(
        itertools.combinations(range(Q.shape[0]), k),
        key=lambda idx: (Q[np.ix_(idx, idx)] ** 2).sum(),
    )
    return Q[np.ix_(best, best)]


def test_random_subsample_never_beats_exhaustive_maximizer():
    rng = np.random.default_rng(1)
    for _ in range(30):
        d = int(rng.integers(3, 9))
        k = int(rng.integers(1, d))
        Q = wishart(rng, d)
        best = (best_principal_submatrix(Q, k) ** 2).sum()
        P, _ = subsample_principal(Q, k, int(rng.integers(2**31)))
        assert (P.values**2).sum() <= best + 1e-12


def test_sqrt_psd():
    assert np.allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(sqrt_psd(np.eye(3)), np.eye(3))
    S = sqrt_psd(GOLDEN_Q)
    assert np.linalg.norm(S @ S - GOLDEN_Q) <= 1e-8 * np.linalg.norm(GOLDEN_Q)
    rng = np.random.default_rng(2)
    for _ in range(50):
        Q = wishart(rng, 6, int(rng.integers(1, 7)))
        S = sqrt_psd(Q)
        assert np.array_equal(S, S.T)
        assert np.linalg.norm(S @ S - Q) <= 1e-8 * (1 + np.linalg.norm(Q))


def test_clamp_band():
    # tiny negative eigenvalue inside the band is clamped
    Q = np.diag([1.0, -1e-12])
    assert np.allclose(sqrt_psd(Q), np.diag([1.0, 0.0]))
    with pytest.raises(NotPsd):
        sqrt_psd(np.diag([1.0, -1e-6]))
    with pytest.raises(NotPsd):
        bures_wasserstein(np.diag([1.0, -0.5]), np.eye(2))
    with pytest.raises(NotPsd):
        PsdMatrix.from_array(np.diag([1.0, -0.5]))
    assert PsdMatrix.from_array(pad(GOLDEN_Q, 4)).effective_rank == 3


def test_bw_examples():
    assert bures_wasserstein([[4.0]], [[9.0]]) == pytest.approx(1.0, abs=1e-14)
    assert bures_wasserstein(np.diag([1.0, 4.0]), np.diag([9.0, 16.0])) == pytest.approx(np.sqrt(8), abs=1e-12)
    assert bures_wasserstein(np.eye(3), np.eye(3)) == 0.0
    assert bures_wasserstein(GOLDEN_Q, np.zeros((3, 3))) == pytest.approx(np.sqrt(44.0), abs=1e-12)
    with pytest.raises(DimensionMismatch):
        bures_wasserstein(np.eye(2), np.eye(3))


def test_procrustes_examples():
    assert procrustes_oracle([[4.0]], [[9.0]]) == pytest.approx(1.0)
    Q = wishart(np.random.default_rng(3), 4)
    assert procrustes_oracle(Q, np.zeros((4, 4))) == pytest.approx(np.sqrt(np.trace(Q)))
    assert procrustes_oracle(np.eye(3), np.eye(3)) == pytest.approx(0.0, abs=1e-7)


def test_frobenius_examples():
    assert frobenius_dist(GOLDEN_Q, GOLDEN_Q) == 0.0
    assert frobenius_dist(np.diag([6.0, 0]), np.diag([0, 6.0])) == pytest.approx(6 * np.sqrt(2))
    # 6^2 + 18^2 + 20^2 + 2*2^2 + 2*6^2 = 840
    assert frobenius_dist(GOLDEN_Q, np.zeros((3, 3))) == pytest.approx(np.sqrt(840))


def test_bw_matches_procrustes_full_rank():
    rng = np.random.default_rng(4)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        A, B = wishart(rng, d), wishart(rng, d)
        ref = procrustes_oracle(A, B)
        assert abs(bures_wasserstein(A, B) - ref) <= 1e-8 * max(1.0, ref)


def test_bw_matches_procrustes_padded():
    # the shapes that reach the kernel: Torelli-like blocks padded with zeros
    rng = np.random.default_rng(5)
    for _ in range(200):
        g0 = int(rng.integers(2, 9))
        A = pad(wishart(rng, int(rng.integers(1, g0 + 1))), g0).values
        B = pad(wishart(rng, int(rng.integers(1, g0 + 1))), g0).values
        ref = procrustes_oracle(A, B)
        assert abs(bures_wasserstein(A, B) - ref) <= 1e-8 * max(1.0, ref)


def test_bw_factors_argument():
    rng = np.random.default_rng(6)
    A, B = wishart(rng, 5, 3), wishart(rng, 5)
    assert bures_wasserstein_sq(A, B, factors=(psd_factor(A), psd_factor(B))) == bures_wasserstein_sq(A, B)
    W = psd_factor(A)
    assert W.shape == (5, 3)
    assert np.allclose(W @ W.T, A)


def test_bw_metric_axioms():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        A, B, C = (wishart(rng, d, int(rng.integers(1, d + 1))) for _ in range(3))
        ab = bures_wasserstein(A, B)
        assert ab == bures_wasserstein(B, A)
        assert ab >= 0
        assert ab <= bures_wasserstein(A, C) + bures_wasserstein(C, B) + 1e-8


def test_bw_orthogonal_invariance():
    rng = np.random.default_rng(8)
    for _ in range(100):
        d = int(rng.integers(2, 9))
        A, B = wishart(rng, d), wishart(rng, d)
        U = ortho_group.rvs(d, random_state=rng)
        got = bures_wasserstein(U @ A @ U.T, U @ B @ U.T)
        assert abs(got - bures_wasserstein(A, B)) <= 1e-8 * max(1.0, got)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_bw_bounded_by_trace_gap(d, seed):
    # (sqrt tr A - sqrt tr B)^2 <= d_W^2 <= tr A + tr B
    rng = np.random.default_rng(seed)
    A, B = wishart(rng, d), wishart(rng, d)
    d2 = bures_wasserstein_sq(A, B)
    lo = (np.sqrt(np.trace(A)) - np.sqrt(np.trace(B))) ** 2
    assert lo - 1e-9 * (1 + lo) <= d2 <= np.trace(A) + np.trace(B) + 1e-9


def test_near_singular_inputs_stay_close():
    # rank-deficient inputs with rounding noise: both routes agree loosely
    rng = np.random.default_rng(9)
    for _ in range(50):
        d = int(rng.integers(3, 9))
        A = wishart(rng, d, 1)
        B = wishart(rng, d, 2)
        assert abs(bures_wasserstein(A, B) - procrustes_oracle(A, B)) <= 1e-6
