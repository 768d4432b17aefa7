"""Common-dimension PSD embeddings and distances between them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tmgk.errors import BoundNotSmaller, DimensionExceedsBound, DimensionMismatch, NotPsd

CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class PsdMatrix:
    values: np.ndarray
    effective_rank: int

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    @classmethod
    def from_array(cls, a) -> "PsdMatrix":
        """Validate a symmetric PSD array (within the clamp band) and wrap it."""
        a = _as_array(a)
        if not np.array_equal(a, a.T):
            a = (a + a.T) / 2
        lam = _checked_eigvalsh(a)
        band = CLAMP * max(float(np.abs(lam).max(initial=0.0)), 0.0)
        return cls(a, int(np.count_nonzero(lam > band)))


@dataclass(frozen=True)
class ReductionPlan:
    mode: str  # "pad" or "subsample"
    index_set: tuple = ()
    seed: int | None = None


def _as_array(Q) -> np.ndarray:
    if isinstance(Q, PsdMatrix):
        return Q.values
    a = np.asarray(getattr(Q, "Q", Q), dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _checked_eigvalsh(a):
    lam = np.linalg.eigvalsh(a) if a.size else np.zeros(0)
    _check_band(lam)
    return lam


def _check_band(lam):
    if lam.size == 0:
        return
    band = CLAMP * float(np.abs(lam).max())
    if lam[0] < -band:
        raise NotPsd(f"eigenvalue {lam[0]:.3e} below clamp band -{band:.3e}")


def pad(Q, g0: int) -> PsdMatrix:
    """Top-left embedding into ``g0 x g0`` with zeros elsewhere."""
    a = _as_array(Q)
    d = a.shape[0]
    if d > g0:
        raise DimensionExceedsBound(f"matrix dimension {d} exceeds g0={g0}")
    out = np.zeros((g0, g0))
    out[:d, :d] = a
    return PsdMatrix(out, d)


def subsample_principal(Q, g0: int, seed: int) -> tuple[PsdMatrix, ReductionPlan]:
    """Principal submatrix on ``g0`` indices drawn uniformly without replacement."""
    a = _as_array(Q)
    d = a.shape[0]
    if d <= g0:
        raise BoundNotSmaller(f"matrix dimension {d} is not larger than g0={g0}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(d, size=g0, replace=False))
    return PsdMatrix(a[np.ix_(idx, idx)], g0), ReductionPlan("subsample", tuple(idx.tolist()), seed)


def reduce_to(Q, g0: int, seed: int) -> tuple[PsdMatrix, ReductionPlan]:
    """Pad when ``dim <= g0``, subsample otherwise."""
    if _as_array(Q).shape[0] <= g0:
        return pad(Q, g0), ReductionPlan("pad")
    return subsample_principal(Q, g0, seed)


def sqrt_psd(Q) -> np.ndarray:
    """Symmetric square root by eigendecomposition.

    Eigenvalues in ``[-1e-10 * lmax, 0)`` are clamped to zero; anything
    lower raises :class:`NotPsd`.
    """
    a = _as_array(Q)
    if a.size == 0:
        return np.zeros_like(a)
    lam, V = np.linalg.eigh((a + a.T) / 2)
    _check_band(lam)
    S = (V * np.sqrt(np.clip(lam, 0.0, None))) @ V.T
    return (S + S.T) / 2


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")


def psd_factor(Q) -> np.ndarray:
    """``W`` with ``W @ W.T == Q`` spanning only the numerical range of ``Q``.

    Eigenvalues at or below ``dim * eps * lmax`` count as zero (the usual
    numerical-rank cutoff), so ``W`` has one column per nonzero eigenvalue.
    """
    a = _as_array(Q)
    if a.size == 0:
        return np.zeros((0, 0))
    lam, V = np.linalg.eigh((a + a.T) / 2)
    _check_band(lam)
    cut = a.shape[0] * np.finfo(float).eps * max(float(np.abs(lam).max()), 0.0)
    keep = lam > cut
    return V[:, keep] * np.sqrt(lam[keep])


def _order_key(a, W):
    return (W.shape[1], a.tobytes())


def _bw_sq_factored(a, b, Wa, Wb) -> float:
    # nonzero spectrum of sqrt(A) B sqrt(A) equals that of Wa' B Wa; working
    # in the smaller range avoids square roots of rounding noise
    # argument order fixed by a key so that d(a, b) and d(b, a) are bitwise equal
    if _order_key(b, Wb) < _order_key(a, Wa):
        a, b, Wa = b, a, Wb
    inner = Wa.T @ b @ Wa
    mu = np.linalg.eigvalsh((inner + inner.T) / 2) if inner.size else np.zeros(0)
    d2 = np.trace(a) + np.trace(b) - 2.0 * np.sqrt(np.clip(mu, 0.0, None)).sum()
    return max(float(d2), 0.0)


def bures_wasserstein_sq(Q1, Q2, *, factors=None) -> float:
    """Squared Bures-Wasserstein distance, clamped at zero.

    ``factors`` may carry precomputed :func:`psd_factor` results for both
    arguments.
    """
    a, b = _as_array(Q1), _as_array(Q2)
    _same_shape(a, b)
    if factors is None:
        Wa, Wb = psd_factor(a), psd_factor(b)
    else:
        Wa, Wb = factors
    if np.array_equal(a, b):
        return 0.0
    return _bw_sq_factored(a, b, Wa, Wb)


def bures_wasserstein(Q1, Q2) -> float:
    return float(np.sqrt(bures_wasserstein_sq(Q1, Q2)))


def procrustes_oracle(Q1, Q2) -> float:
    """Same distance through the nuclear norm of ``sqrt(Q1) sqrt(Q2)``."""
    a, b = _as_array(Q1), _as_array(Q2)
    _same_shape(a, b)
    s = np.linalg.svd(sqrt_psd(a) @ sqrt_psd(b), compute_uv=False)
    d2 = np.trace(a) + np.trace(b) - 2.0 * s.sum()
    return float(np.sqrt(max(d2, 0.0)))


def frobenius_dist(Q1, Q2) -> float:
    a, b = _as_array(Q1), _as_array(Q2)
    _same_shape(a, b)
    return float(np.sqrt(((a - b) ** 2).sum()))
