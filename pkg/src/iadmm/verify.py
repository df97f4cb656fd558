"""Self-checks exposed through ``iadmm verify``.

Each check returns ``(passed, detail)``. They exercise the identities that
tie the solvers together: the reduction chain between the ADMM variants,
the equivalence of the inertial ADMM with inertial Douglas-Rachford on
the dual, the closed-form relaxation table and a hand-solved instance.
"""

from __future__ import annotations

import numpy as np

from .admm import (AdmmParams, SummableAlpha, run_steps, schedule_theorem31,
                   step_reordered)
from .linalg import frobenius_norm
from .operators import IdentityMap, SquaredDistance, TwoBlockProblem
from .rpcp import as_problem, generate
from .splitting import DrParams, DrState, dr_step, dual_resolvents

RELAXATION_TABLE = {0.05: 1.7874, 0.1: 1.6019, 0.2: 1.2496, 0.3: 0.9243}


def rel_diff(a, b) -> float:
    return frobenius_norm(a - b) / max(1.0, frobenius_norm(b))


def trajectory_gap(xs, ys) -> float:
    """Largest relative difference of (u, v, y) along two state sequences."""
    return max(
        max(rel_diff(s.u, t.u), rel_diff(s.v, t.v), rel_diff(s.y, t.y))
        for s, t in zip(xs, ys)
    )


def dual_dr_trajectories(problem, params: AdmmParams, n: int):
    """Run the inertial ADMM and inertial DR on the dual side by side.

    DR starts from ``w_0 = w_1 = y_1 + gamma b - p_1 - gamma N v_1`` and
    the primal iterates are read back from
    ``gamma N v_k = gamma b + y_k - z_k`` and
    ``gamma M u_{k+1} = x_k - 2 y_k + z_k`` where ``z_k`` is the
    extrapolated point fed to the first resolvent.

    Returns ``(admm_states, dr_rows)`` with ``dr_rows[k] = (y_k, v_k, u_{k+1})``
    aligned so that ``admm_states[k]`` holds ``y_{k+1}``, ``v_{k+1}``.
    """
    g, b = params.gamma, problem.b
    c_m, c_n = problem.M.scale, problem.N.scale
    states = run_steps(problem, params, n)
    s0 = states[0]
    w1 = s0.y + g * b - s0.p - g * problem.N.apply(s0.v)

    if callable(params.alpha):
        rule = params.alpha
        cap = rule.cap if isinstance(rule, SummableAlpha) else 1.0

        def adaptive(k, dw):
            # alpha_{k} of DR is the ADMM alpha computed at iteration k - 1
            if k == 1:
                return cap
            sq = frobenius_norm(dw) ** 2
            return cap if sq == 0.0 else min(1.0 / ((k - 1) ** 2 * sq), cap)

        dr = DrParams(gamma=g, lam=params.lam, alpha_bar=cap, mode="theorem22",
                      adaptive_alpha=adaptive)
    else:
        dr = DrParams(gamma=g, alpha=float(params.alpha), lam=params.lam,
                      alpha_bar=float(params.alpha), mode="theorem22")

    A, B = dual_resolvents(problem)
    state = DrState.start(w1)
    rows = []
    for _ in range(n):
        k = state.iteration + 1
        dw = state.w - state.w_prev
        a = dr.adaptive_alpha(k, dw) if dr.adaptive_alpha else dr.alpha_at(k)
        z = state.w + a * dw
        state = dr_step(state, A, B, dr)
        v = (b + (state.y - z) / g) / c_n
        u = (state.x - 2 * state.y + z) / (g * c_m)
        rows.append((state.y, v, u))
    return states, rows


def dual_dr_gap(problem, params: AdmmParams, n: int) -> float:
    states, rows = dual_dr_trajectories(problem, params, n)
    gap = 0.0
    for k, (y, v, u) in enumerate(rows):
        s = states[k]
        gap = max(gap, rel_diff(y, s.y), rel_diff(v, s.v), rel_diff(u, states[k + 1].u))
    return gap


def quadratic_instance() -> TwoBlockProblem:
    """``F = (u-3)^2/2``, ``G = (v+1)^2/2``, ``u + v = 1``; KKT point (2.5, -1.5, 0.5)."""
    shape = (1, 1)
    return TwoBlockProblem(
        F=SquaredDistance(3.0), G=SquaredDistance(-1.0),
        M=IdentityMap(shape), N=IdentityMap(shape), b=np.ones(shape),
    )


def check_relaxation_table():
    worst = 0.0
    for a, lam in RELAXATION_TABLE.items():
        worst = max(worst, abs(round(schedule_theorem31(a, 0.01)[1], 4) - lam))
    return worst == 0.0, f"max 4-d.p. mismatch {worst:g}"


def check_reduction_chain(m=40, n=30, seed=0, tol=1e-12):
    prob = as_problem(generate(m, max(1, m // 20), m * m // 20, seed))
    lam = schedule_theorem31(0.2)[1]
    g1 = trajectory_gap(
        run_steps(prob, AdmmParams(variant="algorithm1", alpha=0.0, lam=lam), n),
        run_steps(prob, AdmmParams.gadmm(lam), n),
    )
    g2 = trajectory_gap(
        run_steps(prob, AdmmParams.gadmm(1.0), n),
        run_steps(prob, AdmmParams.classical(), n),
    )
    g3 = trajectory_gap(
        run_steps(prob, AdmmParams.iadmm_chen(0.0), n),
        run_steps(prob, AdmmParams.classical(), n, step=step_reordered),
    )
    worst = max(g1, g2, g3)
    return worst <= tol, f"alg1/gadmm {g1:.2e}, gadmm/classical {g2:.2e}, chen/reordered {g3:.2e}"


def check_dual_dr(m=20, n=50, seed=0, tol=1e-8):
    prob = as_problem(generate(m, max(1, m // 20), m * m // 20, seed))
    gaps = {
        "(0.2, 1.2496)": dual_dr_gap(prob, AdmmParams(variant="algorithm1", alpha=0.2, lam=1.2496), n),
        "(0, 1)": dual_dr_gap(prob, AdmmParams(variant="algorithm1", alpha=0.0, lam=1.0), n),
        "summable": dual_dr_gap(prob, AdmmParams.algorithm1_summable(1.5), n),
    }
    worst = max(gaps.values())
    return worst <= tol, ", ".join(f"{k}: {v:.2e}" for k, v in gaps.items())


def check_analytic(tol=1e-8, max_iter=500):
    prob = quadratic_instance()
    target = (2.5, -1.5, 0.5)
    configs = {
        "classical": AdmmParams.classical(gamma=1.0),
        "gadmm": AdmmParams.gadmm(1.6, gamma=1.0),
        "iadmm_chen": AdmmParams.iadmm_chen(0.3, gamma=1.0),
        "algorithm1": AdmmParams.algorithm1(0.2, gamma=1.0),
    }
    worst = 0.0
    for params in configs.values():
        s = run_steps(prob, params, max_iter)[-1]
        err = max(abs(s.u.item() - target[0]), abs(s.v.item() - target[1]),
                  abs(s.y.item() - target[2]))
        worst = max(worst, err)
    return worst <= tol, f"max error {worst:.2e}"


CHECKS = {
    "relaxation-table": check_relaxation_table,
    "reduction-chain": check_reduction_chain,
    "dual-dr-equivalence": check_dual_dr,
    "analytic-instance": check_analytic,
}


def run_all(echo=print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        passed, detail = check()
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return ok


__all__ = ["CHECKS", "dual_dr_gap", "dual_dr_trajectories",
           "quadratic_instance", "rel_diff", "run_all", "trajectory_gap"]
