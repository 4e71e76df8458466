"""Symmetric-matrix primitives and kernel evaluation.

Everything here works on dense float64 arrays. Functions that return a
symmetric matrix symmetrize it as (M + M') / 2 before returning, so
downstream eigendecompositions never see asymmetric round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelSpec",
    "kernel_value",
    "gram_matrix",
    "cross_gram",
    "median_heuristic_gamma",
    "symmetrize",
    "sym_eigen",
    "matrix_sqrt",
    "matrix_inv_sqrt",
    "psd_project",
    "trace_cap",
    "default_ridge",
    "frobenius_inner",
]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters.

    family is "linear" or "rbf"; for rbf the kernel is
    exp(-gamma * ||a - b||^2) and gamma must be positive.
    """

    family: str
    gamma: float | None = None

    def __post_init__(self):
        if self.family not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "rbf" and (self.gamma is None or not self.gamma > 0):
            raise ValueError("rbf kernel needs gamma > 0")


def _as_sample_matrix(X) -> np.ndarray:
    try:
        X = np.asarray(X, dtype=float)
    except ValueError as exc:
        raise ValueError("samples must share a common dimension") from exc
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a matrix of row samples, got ndim={X.ndim}")
    return X


def kernel_value(spec: KernelSpec, a, b) -> float:
    """Evaluate k(a, b) for a single pair of vectors."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    if spec.family == "linear":
        return float(a @ b)
    d = a - b
    return float(np.exp(-spec.gamma * (d @ d)))


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Gram matrix of row samples X under spec, returned symmetrized.

    Parameters
    ----------
    spec : KernelSpec
    X : array_like, shape (n, d)
        One sample per row, n >= 1.

    Returns
    -------
    ndarray, shape (n, n)
        Symmetric PSD up to round-off; rbf entries lie in (0, 1].
    """
    X = _as_sample_matrix(X)
    if X.shape[0] == 0:
        raise ValueError("empty sample set")
    if spec.family == "linear":
        return symmetrize(X @ X.T)
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return symmetrize(np.exp(-spec.gamma * d2))


def cross_gram(spec: KernelSpec, X, Z) -> np.ndarray:
    """Rectangular kernel block k(x_i, z_j), shape (len(X), len(Z))."""
    X = _as_sample_matrix(X)
    Z = _as_sample_matrix(Z)
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch {X.shape[1]} vs {Z.shape[1]}")
    if spec.family == "linear":
        return X @ Z.T
    sx = np.einsum("ij,ij->i", X, X)
    sz = np.einsum("ij,ij->i", Z, Z)
    d2 = sx[:, None] + sz[None, :] - 2.0 * (X @ Z.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-spec.gamma * d2)


def median_heuristic_gamma(X) -> float:
    """Bandwidth 1 / median(||x_i - x_j||^2) over distinct pairs.

    Falls back to 1.0 when the median is not positive (all points
    coincident or a single sample).
    """
    X = _as_sample_matrix(X)
    n = X.shape[0]
    if n < 2:
        return 1.0
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    pairs = d2[np.triu_indices(n, k=1)]
    med = float(np.median(pairs))
    if med <= 0.0:
        return 1.0
    return 1.0 / med


def symmetrize(M) -> np.ndarray:
    """(M + M') / 2."""
    M = np.asarray(M, dtype=float)
    _check_square(M)
    return 0.5 * (M + M.T)


def _check_square(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")


def _check_finite(M: np.ndarray) -> None:
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")


def sym_eigen(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    M : array_like, square
        Symmetrized internally before factoring.

    Returns
    -------
    w : ndarray
        Eigenvalues in descending order.
    V : ndarray
        Orthonormal eigenvectors as columns, aligned with w, so that
        M ~= V @ diag(w) @ V.T.
    """
    M = np.asarray(M, dtype=float)
    _check_square(M)
    _check_finite(M)
    w, V = np.linalg.eigh(symmetrize(M))
    return w[::-1], V[:, ::-1]


def matrix_sqrt(M, ridge: float = 0.0) -> np.ndarray:
    """Symmetric square root V diag(sqrt(max(w + ridge, 0))) V'.

    Negative eigenvalues surviving the ridge are clipped to zero, so the
    result is PSD for any symmetric input.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    w, V = sym_eigen(M)
    s = np.sqrt(np.maximum(w + ridge, 0.0))
    return symmetrize((V * s) @ V.T)


def matrix_inv_sqrt(M, ridge: float) -> np.ndarray:
    """Symmetric inverse square root V diag(1 / sqrt(max(w, 0) + ridge)) V'.

    The ridge must be positive; it alone bounds the denominator, so the
    result is finite for any symmetric input including singular ones.
    """
    if not ridge > 0:
        raise ValueError("ridge must be positive")
    w, V = sym_eigen(M)
    s = 1.0 / np.sqrt(np.maximum(w, 0.0) + ridge)
    return symmetrize((V * s) @ V.T)


def psd_project(M) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clip negative eigenvalues at 0."""
    M = np.asarray(M, dtype=float)
    w, V = sym_eigen(M)
    if w.size == 0 or w[-1] >= 0.0:
        # already PSD, return unchanged apart from symmetrization
        return symmetrize(M)
    s = np.maximum(w, 0.0)
    return symmetrize((V * s) @ V.T)


def trace_cap(M, cap: float) -> np.ndarray:
    """Scale M by cap / trace(M) when trace(M) > cap, else return M as is."""
    if not cap > 0:
        raise ValueError("cap must be positive")
    M = np.asarray(M, dtype=float)
    _check_square(M)
    t = float(np.trace(M))
    if t <= cap:
        return M
    return M * (cap / t)


def default_ridge(M) -> float:
    """Scale-aware ridge 1e-8 * trace(M) / order, floored at 1e-12."""
    M = np.asarray(M, dtype=float)
    _check_square(M)
    n = M.shape[0]
    if n == 0:
        return 1e-12
    return max(1e-8 * float(np.trace(M)) / n, 1e-12)


def frobenius_inner(A, B) -> float:
    """Frobenius inner product <A, B> = sum_ij A_ij B_ij."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.tensordot(A, B))
