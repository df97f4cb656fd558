"""Robust principal component pursuit ``min ||u||_* + mu ||v||_1  s.t.  u + v = b``.

Synthetic instances follow the usual recipe: ``u* = L R^T`` with standard
normal ``m x r`` factors, and a sparse ``v*`` whose support is uniform and
whose values are uniform on ``[-500, 500]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admm import numerical_rank
from .linalg import frobenius_norm, make_rng, randn_matrix, sparse_uniform_matrix
from .operators import IdentityMap, L1Norm, NuclearNorm, TwoBlockProblem

__all__ = ["RpcpInstance", "as_problem", "generate", "recovery_metrics"]

SPARSE_RANGE = (-500.0, 500.0)


@dataclass(frozen=True)
class RpcpInstance:
    m: int
    r: int
    nnz: int
    u_star: np.ndarray
    v_star: np.ndarray
    b: np.ndarray
    mu: float
    seed: int


def generate(m: int, r: int, nnz: int, seed: int) -> RpcpInstance:
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if not 1 <= r <= m:
        raise ValueError(f"rank r must lie in [1, {m}], got {r}")
    if not 0 <= nnz <= m * m:
        raise ValueError(f"nnz must lie in [0, {m * m}], got {nnz}")
    rng = make_rng(seed)
    L = randn_matrix(rng, m, r)
    R = randn_matrix(rng, m, r)
    u_star = L @ R.T
    v_star = sparse_uniform_matrix(rng, m, m, nnz, *SPARSE_RANGE)
    return RpcpInstance(
        m=m, r=r, nnz=nnz, u_star=u_star, v_star=v_star,
        b=u_star + v_star, mu=1.0 / math.sqrt(m), seed=seed,
    )


def as_problem(inst: RpcpInstance) -> TwoBlockProblem:
    """``F = ||.||_*``, ``G = mu ||.||_1``, ``M = N = I``."""
    shape = inst.b.shape
    return TwoBlockProblem(
        F=NuclearNorm(), G=L1Norm(inst.mu),
        M=IdentityMap(shape), N=IdentityMap(shape), b=inst.b,
    )


def recovery_metrics(inst: RpcpInstance, u_k, v_k) -> tuple[float, float, int]:
    """``(||u_k - u*|| / ||u*||, ||v_k - v*|| / ||v*||, rank(u_k))``.

    ``rel v*`` is the absolute error when ``v* = 0``.
    """
    rel_u = frobenius_norm(u_k - inst.u_star) / frobenius_norm(inst.u_star)
    nv = frobenius_norm(inst.v_star)
    err_v = frobenius_norm(v_k - inst.v_star)
    rel_v = err_v / nv if nv > 0 else err_v
    return rel_u, rel_v, numerical_rank(u_k)
