import math

import numpy as np
import pytest

from iadmm.admm import AdmmParams, solve
from iadmm.linalg import svd
from iadmm.operators import IdentityMap, soft_threshold, svt
from iadmm.rpcp import as_problem, generate, recovery_metrics


@pytest.mark.parametrize("m, r, nnz", [(30, 3, 45), (50, 50, 0), (17, 1, 289)])
def test_instance_invariants(m, r, nnz):
    inst = generate(m, r, nnz, seed=11)
    assert np.array_equal(inst.b, inst.u_star + inst.v_star)
    s = svd(inst.u_star).s
    assert s[r - 1] / s[0] > 1e-10
    if r < m:
        assert s[r] / s[0] < 1e-10
    assert np.count_nonzero(inst.v_star) == nnz
    assert np.abs(inst.v_star).max(initial=0.0) <= 500
    assert inst.mu * math.sqrt(m) == pytest.approx(1.0, abs=1e-15)


def test_no_sparse_part():
    inst = generate(20, 2, 0, seed=0)
    assert not inst.v_star.any() and np.array_equal(inst.b, inst.u_star)


def test_large_instance_counts():
    inst = generate(1000, 100, 50000, seed=0)
    assert np.count_nonzero(inst.v_star) == 50000
    s = svd(inst.u_star).s
    assert s[99] / s[0] > 1e-10 > s[100] / s[0]


def test_generate_is_deterministic():
    a, b = generate(25, 2, 30, 5), generate(25, 2, 30, 5)
    assert a.b.tobytes() == b.b.tobytes()
    assert generate(25, 2, 30, 6).b.tobytes() != a.b.tobytes()


@pytest.mark.parametrize("m, r, nnz", [(10, 0, 5), (10, 11, 5), (10, 2, 101), (0, 1, 0)])
def test_generate_argument_errors(m, r, nnz):
    with pytest.raises(ValueError):
        generate(m, r, nnz, 0)


def test_problem_structure():
    inst = generate(12, 2, 10, 1)
    prob = as_problem(inst)
    assert isinstance(prob.M, IdentityMap) and isinstance(prob.N, IdentityMap)
    assert prob.F.has_conjugate and prob.G.has_conjugate
    x = np.random.default_rng(0).standard_normal((12, 12))
    np.testing.assert_array_equal(prob.F.prox(x, 100.0), svt(x, 100.0))
    np.testing.assert_array_equal(prob.G.prox(x, 2.0), soft_threshold(x, 2.0 * inst.mu))
    d = np.zeros((12, 12))
    d[0, 0], d[1, 1] = 3.0, 1.0
    assert prob.F.value(d) == pytest.approx(4.0)


def test_objective_at_ground_truth():
    inst = generate(15, 2, 20, 3)
    prob = as_problem(inst)
    expected = np.sum(svd(inst.u_star).s) + inst.mu * np.abs(inst.v_star).sum()
    assert prob.F.value(inst.u_star) + prob.G.value(inst.v_star) == pytest.approx(expected)


def test_recovery_metrics_at_truth():
    inst = generate(20, 3, 15, 2)
    assert recovery_metrics(inst, inst.u_star, inst.v_star) == (0.0, 0.0, 3)


def test_recovery_metrics_without_sparse_part():
    inst = generate(10, 1, 0, 2)
    _, rel_v, _ = recovery_metrics(inst, inst.u_star, np.full((10, 10), 0.5))
    assert rel_v == pytest.approx(5.0)


def test_small_instance_is_recovered():
    inst = generate(60, 3, 180, seed=4)
    rep = solve(as_problem(inst), AdmmParams.algorithm1(0.2, epsilon=1e-9, max_iter=3000))
    rel_u, rel_v, rank = recovery_metrics(inst, rep.u, rep.v)
    assert rep.converged and rank == 3
    assert rel_u < 1e-5 and rel_v < 1e-5
