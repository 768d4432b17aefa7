"""C-SVM on precomputed kernels, cross-validation and kernel PCA."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from tmgk._backend import core
from tmgk.errors import DimensionMismatch, DimsExceedN, SingleClassInput, TooFewSamples

SV_EPS = 1e-12


def _matrix(K) -> np.ndarray:
    a = getattr(K, "values", K)
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d kernel matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class SvmModel:
    alpha: np.ndarray
    y: np.ndarray
    b: float
    C: float
    support: np.ndarray
    iterations: int
    converged: bool
    objective_history: np.ndarray = field(repr=False)
    classes: tuple = (1, -1)  # labels for f >= 0 and f < 0

    @property
    def objective(self) -> float:
        return float(self.objective_history[-1]) if len(self.objective_history) else 0.0

    def decision(self, k_rows) -> np.ndarray:
        k = np.atleast_2d(np.asarray(k_rows, dtype=np.float64))
        if k.shape[1] != len(self.alpha):
            raise DimensionMismatch(
                f"kernel rows have {k.shape[1]} columns, model has {len(self.alpha)} training points"
            )
        return k @ (self.alpha * self.y) + self.b


def dual_objective(K, y, alpha) -> float:
    """``sum(a) - 0.5 * a' (yy' * K) a``."""
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ _matrix(K) @ v)


def _bias(alpha, y, grad, C) -> float:
    yg = y * grad
    upper = alpha >= C - SV_EPS
    lower = alpha <= SV_EPS
    free = ~(upper | lower)
    if free.any():
        return float(-yg[free].mean())
    pos = y > 0
    ub_set = (upper & ~pos) | (lower & pos)
    lb_set = (upper & pos) | (lower & ~pos)
    ub = yg[ub_set].min() if ub_set.any() else np.inf
    lb = yg[lb_set].max() if lb_set.any() else -np.inf
    if not np.isfinite(ub):
        ub = lb
    if not np.isfinite(lb):
        lb = ub
    return float(-(ub + lb) / 2)


def _train_binary(K, y, C, max_iter, tol, backend) -> SvmModel:
    Q = (y[:, None] * y[None, :]) * K
    kern = core if backend is None else backend
    alpha, grad, it, hist = kern.smo_solve(Q, y, float(C), float(tol), int(max_iter), True)
    alpha = np.clip(alpha, 0.0, C)
    return SvmModel(
        alpha=alpha,
        y=y,
        b=_bias(alpha, y, grad, C),
        C=float(C),
        support=np.flatnonzero(alpha > SV_EPS),
        iterations=int(it),
        converged=bool(it < max_iter),
        objective_history=np.asarray(hist),
    )


@dataclass(frozen=True, eq=False)
class OneVsOneSvm:
    classes: tuple
    pairs: tuple  # (class_a, class_b, train_index, SvmModel)

    def predict(self, k_rows) -> np.ndarray:
        k = np.atleast_2d(np.asarray(k_rows, dtype=np.float64))
        votes = np.zeros((k.shape[0], len(self.classes)), dtype=np.int64)
        pos = {c: i for i, c in enumerate(self.classes)}
        for a, b, idx, model in self.pairs:
            f = model.decision(k[:, idx])
            winner = np.where(f >= 0, pos[a], pos[b])
            np.add.at(votes, (np.arange(k.shape[0]), winner), 1)
        # argmax returns the first maximum, so ties go to the smallest label
        return np.asarray(self.classes)[votes.argmax(axis=1)]


def svm_train(K, labels, C: float = 1.0, max_iter: int = 10000, tol: float = 1e-3, backend=None):
    """Train a C-SVM on a precomputed kernel.

    Labels in {-1, +1} give a binary :class:`SvmModel`; any other label set
    is handled one-vs-one.
    """
    K = _matrix(K)
    labels = np.asarray(labels).reshape(-1)
    if K.shape != (len(labels), len(labels)):
        raise DimensionMismatch(f"kernel shape {K.shape} does not match {len(labels)} labels")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise SingleClassInput(f"need at least two classes, got {classes.tolist()}")
    if set(classes.tolist()) == {-1, 1}:
        return _train_binary(K, labels.astype(np.float64), C, max_iter, tol, backend)
    pairs = []
    for a, b in combinations(classes.tolist(), 2):
        idx = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[idx] == a, 1.0, -1.0)
        model = _train_binary(K[np.ix_(idx, idx)], y, C, max_iter, tol, backend)
        pairs.append((a, b, idx, model))
    return OneVsOneSvm(tuple(classes.tolist()), tuple(pairs))


def svm_predict(model, k_rows) -> np.ndarray:
    """Predicted labels; ``f = 0`` counts as the positive side."""
    if isinstance(model, OneVsOneSvm):
        return model.predict(k_rows)
    f = model.decision(k_rows)
    return np.where(f >= 0, 1, -1)


@dataclass(frozen=True, eq=False)
class CvReport:
    accuracies: np.ndarray
    mean: float
    std: float
    seed: int
    folds: tuple  # test indices per fold
    predictions: np.ndarray = field(repr=False)


def fold_assignment(ids, folds: int, seed: int) -> tuple:
    """Near-equal folds from a seeded hash of stable ids."""
    keys = [
        hashlib.blake2b(f"{int(seed)}\x1f{i}".encode(), digest_size=8).digest() for i in ids
    ]
    order = sorted(range(len(keys)), key=lambda k: (keys[k], k))
    return tuple(np.sort(part) for part in np.array_split(np.asarray(order, dtype=np.int64), folds))


def cross_validate(
    K, labels, folds: int = 10, C: float = 1.0, seed: int = 0, ids=None, max_iter: int = 10000
) -> CvReport:
    A = _matrix(K)
    labels = np.asarray(labels).reshape(-1)
    n = len(labels)
    if A.shape != (n, n):
        raise DimensionMismatch(f"kernel shape {A.shape} does not match {n} labels")
    if folds < 2 or n < folds:
        raise TooFewSamples(f"need at least {max(folds, 2)} samples for {folds} folds, got {n}")
    if ids is None:
        ids = getattr(K, "ids", None) or [str(i) for i in range(n)]
    parts = fold_assignment(ids, folds, seed)
    pred = np.empty_like(labels)
    acc = []
    for test in parts:
        train = np.setdiff1d(np.arange(n), test)
        if np.unique(labels[train]).size < 2:
            pred[test] = labels[train][0]
        else:
            model = svm_train(A[np.ix_(train, train)], labels[train], C=C, max_iter=max_iter)
            pred[test] = svm_predict(model, A[np.ix_(test, train)])
        acc.append(float(np.mean(pred[test] == labels[test])))
    acc = np.asarray(acc)
    return CvReport(acc, float(acc.mean()), float(acc.std()), int(seed), parts, pred)


def kernel_pca(K, dims: int = 2) -> np.ndarray:
    """Embedding from the top eigenpairs of the double-centred kernel."""
    A = _matrix(K)
    n = A.shape[0]
    if dims > n:
        raise DimsExceedN(f"dims={dims} exceeds the number of samples {n}")
    H = np.eye(n) - 1.0 / n
    Kc = H @ A @ H
    lam, V = np.linalg.eigh((Kc + Kc.T) / 2)
    top = np.argsort(lam, kind="stable")[::-1][:dims]
    X = V[:, top] * np.sqrt(np.clip(lam[top], 0.0, None))
    for j in range(X.shape[1]):
        k = int(np.argmax(np.abs(X[:, j])))
        if X[k, j] < 0:
            X[:, j] = -X[:, j]
    return X
