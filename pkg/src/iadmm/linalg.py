"""Dense linear algebra and seeded random matrices.

Every iterate in the package is a plain two-dimensional ``numpy.ndarray``
of float64; vectors and scalars are carried as ``(n, 1)`` and ``(1, 1)``
matrices so that the same code paths serve every problem instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdError",
    "SvdResult",
    "as_matrix",
    "frobenius_norm",
    "inner",
    "make_rng",
    "randn_matrix",
    "sparse_uniform_matrix",
    "svd",
]


class SvdError(RuntimeError):
    """Raised when the singular value decomposition fails to converge."""


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``A = U @ diag(s) @ V.T`` with ``k = min(rows, cols)``."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.T


def as_matrix(x, *, name: str = "matrix") -> np.ndarray:
    """Coerce scalars, vectors and 2-D arrays to a finite float64 matrix.

    Scalars become ``(1, 1)`` and 1-D arrays become column vectors.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise ValueError(f"{name} must be at most 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(a))))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Trace inner product ``<a, b> = sum_ij a_ij b_ij``."""
    return float(np.vdot(a, b))


def svd(a: np.ndarray) -> SvdResult:
    """Thin singular value decomposition.

    Backed by LAPACK's divide-and-conquer driver. Singular values come
    back non-increasing and non-negative.

    Raises
    ------
    ValueError
        If `a` has non-finite entries.
    SvdError
        If LAPACK reports non-convergence.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"svd expects a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd input contains non-finite entries")
    try:
        U, s, Vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdError(f"SVD did not converge for {a.shape} matrix") from exc
    return SvdResult(U=U, s=s, V=Vt.T)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams everywhere."""
    return np.random.Generator(np.random.PCG64(seed))


def randn_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got ({rows}, {cols})")
    return rng.standard_normal((rows, cols))


def sparse_uniform_matrix(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    nnz: int,
    lo: float,
    hi: float,
) -> np.ndarray:
    """Dense matrix with exactly `nnz` nonzeros drawn uniformly on ``[lo, hi]``.

    The support is a uniform draw without replacement over all
    ``rows * cols`` positions.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got ({rows}, {cols})")
    size = rows * cols
    if not 0 <= nnz <= size:
        raise ValueError(f"nnz must lie in [0, {size}], got {nnz}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    out = np.zeros(size)
    if nnz:
        support = rng.choice(size, size=nnz, replace=False)
        values = rng.uniform(lo, hi, size=nnz)
        # an exact zero would silently shrink the support
        while np.any(values == 0.0):
            zero = values == 0.0
            values[zero] = rng.uniform(lo, hi, size=int(zero.sum()))
        out[support] = values
    return out.reshape(rows, cols)
