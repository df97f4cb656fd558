"""Linear maps, proximable convex functions and the two-block problem.

A :class:`Proximable` bundles a convex function with its proximal map
``prox(x, t) = argmin_y t*f(y) + 0.5*||y - x||_F^2``; the prox of the
conjugate comes for free through the Moreau decomposition
(:func:`conjugate_prox`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, frobenius_norm, inner, svd

__all__ = [
    "IdentityMap",
    "L1Norm",
    "LinearMap",
    "MatrixMap",
    "NuclearNorm",
    "Proximable",
    "ScaledIdentityMap",
    "SquaredDistance",
    "TwoBlockProblem",
    "ZeroFunction",
    "conjugate_prox",
    "objective",
    "soft_threshold",
    "svt",
]

# slack when evaluating indicator functions at points produced by a prox,
# which sit on the boundary of the set up to rounding
_INDICATOR_RTOL = 1e-9


def _within(norm: float, radius: float) -> bool:
    return norm <= radius * (1.0 + _INDICATOR_RTOL) + 1e-12


# -- linear maps -------------------------------------------------------------


class LinearMap:
    """Bounded linear operator between spaces of dense matrices.

    Subclasses implement :meth:`apply` and :meth:`adjoint`. ``scale`` is
    set when the map is ``c * I``; the solvers use it to pick closed-form
    subproblem solutions.
    """

    is_identity = False
    scale: float | None = None

    def __init__(self, domain_shape, codomain_shape, has_full_column_rank=True):
        self.domain_shape = tuple(domain_shape)
        self.codomain_shape = tuple(codomain_shape)
        self.has_full_column_rank = has_full_column_rank

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)

    def __repr__(self):
        return f"{type(self).__name__}({self.domain_shape} -> {self.codomain_shape})"


class ScaledIdentityMap(LinearMap):
    def __init__(self, c: float, shape):
        if c == 0:
            raise ValueError("scaled identity needs a nonzero factor")
        super().__init__(shape, shape, has_full_column_rank=True)
        self.scale = float(c)

    def apply(self, x):
        return self.scale * x

    def adjoint(self, y):
        return self.scale * y


class IdentityMap(ScaledIdentityMap):
    is_identity = True

    def __init__(self, shape):
        super().__init__(1.0, shape)

    def apply(self, x):
        return x

    def adjoint(self, y):
        return y


class MatrixMap(LinearMap):
    """Left multiplication ``x -> A @ x`` on ``(n, q)`` matrices."""

    def __init__(self, A, cols: int = 1):
        A = as_matrix(A, name="A")
        self.A = A
        rank = np.linalg.matrix_rank(A)
        super().__init__(
            (A.shape[1], cols), (A.shape[0], cols),
            has_full_column_rank=bool(rank == A.shape[1]),
        )

    def apply(self, x):
        return self.A @ x

    def adjoint(self, y):
        return self.A.T @ y


# -- prox library ------------------------------------------------------------


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Entrywise ``sign(x) * max(|x| - tau, 0)``."""
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(x: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding, the prox of ``tau * ||.||_*``."""
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    dec = svd(x)
    s = np.maximum(dec.s - tau, 0.0)
    keep = s > 0
    if not np.any(keep):
        return np.zeros_like(x)
    return (dec.U[:, keep] * s[keep]) @ dec.V[:, keep].T


class Proximable:
    """Proper closed convex function with a computable prox.

    ``conjugate_value`` is optional; :attr:`has_conjugate` tells whether
    the subclass provides it.
    """

    has_conjugate = False

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, x: np.ndarray, step: float) -> np.ndarray:
        raise NotImplementedError

    def conjugate_value(self, z: np.ndarray) -> float:
        raise NotImplementedError(f"{type(self).__name__} has no conjugate")

    def __call__(self, x):
        return self.value(x)


class ZeroFunction(Proximable):
    has_conjugate = True

    def value(self, x):
        return 0.0

    def prox(self, x, step):
        return np.array(x, dtype=np.float64, copy=True)

    def conjugate_value(self, z):
        return 0.0 if _within(float(np.max(np.abs(z))), 0.0) else math.inf


class L1Norm(Proximable):
    """``weight * sum_ij |x_ij|``; its conjugate is the indicator of the
    ``||.||_inf <= weight`` box."""

    has_conjugate = True

    def __init__(self, weight: float = 1.0):
        if weight <= 0:
            raise ValueError(f"weight must be positive, got {weight}")
        self.weight = float(weight)

    def value(self, x):
        return self.weight * float(np.sum(np.abs(x)))

    def prox(self, x, step):
        return soft_threshold(x, self.weight * step)

    def conjugate_value(self, z):
        return 0.0 if _within(float(np.max(np.abs(z))), self.weight) else math.inf


class NuclearNorm(Proximable):
    """``weight * sum_k sigma_k(x)``; its conjugate is the indicator of
    the spectral-norm ball of radius ``weight``."""

    has_conjugate = True

    def __init__(self, weight: float = 1.0):
        if weight <= 0:
            raise ValueError(f"weight must be positive, got {weight}")
        self.weight = float(weight)

    def value(self, x):
        return self.weight * float(np.sum(svd(x).s))

    def prox(self, x, step):
        return svt(x, self.weight * step)

    def conjugate_value(self, z):
        top = float(svd(z).s[0])
        return 0.0 if _within(top, self.weight) else math.inf


class SquaredDistance(Proximable):
    """``0.5 * weight * ||x - center||_F^2``."""

    has_conjugate = True

    def __init__(self, center, weight: float = 1.0):
        if weight <= 0:
            raise ValueError(f"weight must be positive, got {weight}")
        self.center = as_matrix(center, name="center")
        self.weight = float(weight)

    def value(self, x):
        return 0.5 * self.weight * frobenius_norm(x - self.center) ** 2

    def prox(self, x, step):
        tw = step * self.weight
        return (x + tw * self.center) / (1.0 + tw)

    def conjugate_value(self, z):
        return inner(z, self.center) + frobenius_norm(z) ** 2 / (2.0 * self.weight)


def conjugate_prox(f: Proximable, x: np.ndarray, gamma: float) -> np.ndarray:
    """Prox of ``gamma * f^*`` at `x` via Moreau decomposition."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return x - gamma * f.prox(x / gamma, 1.0 / gamma)


# -- problem -----------------------------------------------------------------


@dataclass(frozen=True)
class TwoBlockProblem:
    """``min F(u) + G(v)  s.t.  M u + N v = b``."""

    F: Proximable
    G: Proximable
    M: LinearMap
    N: LinearMap
    b: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.b, name="b")
        object.__setattr__(self, "b", b)
        for name, op in (("M", self.M), ("N", self.N)):
            if op.codomain_shape != b.shape:
                raise ValueError(
                    f"codomain of {name} is {op.codomain_shape}, b has shape {b.shape}"
                )

    @property
    def u_shape(self):
        return self.M.domain_shape

    @property
    def v_shape(self):
        return self.N.domain_shape

    def residual(self, u, v) -> np.ndarray:
        return self.M.apply(u) + self.N.apply(v) - self.b


def objective(problem: TwoBlockProblem, u, v) -> float:
    return problem.F.value(u) + problem.G.value(v)
