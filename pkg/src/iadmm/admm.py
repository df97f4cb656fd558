"""ADMM variants for ``min F(u) + G(v)  s.t.  M u + N v = b``.

Four schemes share one state type and one driver, :func:`solve`:

``classical``
    u -> v -> y with the plain augmented Lagrangian.
``gadmm``
    relaxed v- and y-updates with ``lambda_k`` in (0, 2).
``iadmm_chen``
    inertial proximal ADMM: extrapolate (u, v, y), then u -> y -> v,
    with optional proximal terms ``s/2 ||u - u_bar||^2`` and
    ``t/2 ||v - v_bar||^2``.
``algorithm1``
    inertial ADMM obtained from inertial Douglas-Rachford on the dual;
    carries an extra auxiliary sequence ``p`` (``p_1 = 0``).

Every argmin step has the form
``argmin_u F(u) + gamma/2 ||M u - target||^2 + weight/2 ||u - center||^2``
and is delegated to a :class:`SubproblemOracle`.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from .linalg import frobenius_norm, inner, svd
from .operators import TwoBlockProblem
from .splitting import DivergedError, DrParams, lambda_upper_bound, validate_params

__all__ = [
    "VARIANTS",
    "AdmmParams",
    "AdmmState",
    "ClosedFormOracle",
    "ConfigurationError",
    "Diagnostics",
    "SolveReport",
    "SubproblemOracle",
    "SummableAlpha",
    "TraceRow",
    "diagnostics",
    "numerical_rank",
    "schedule_theorem31",
    "schedule_theorem32_alpha",
    "solve",
    "step_algorithm1",
    "step_classical",
    "step_gadmm",
    "step_iadmm_chen",
    "step_reordered",
    "stopping_check",
]

log = logging.getLogger(__name__)

VARIANTS = ("classical", "gadmm", "iadmm_chen", "algorithm1")

RANK_RTOL = 1e-6


class ConfigurationError(ValueError):
    """Solver parameters or problem structure are unusable."""


# -- parameter schedules -----------------------------------------------------


def schedule_theorem31(alpha: float, sigma: float = 0.01) -> tuple[float, float]:
    """Relaxation matched to a constant inertia `alpha`.

    Returns ``(delta, lam)`` with
    ``delta = 1 + (a^2 (1+a) + a s) / (1 - a^2)`` and ``lam`` the largest
    relaxation allowed for that delta.
    """
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    delta = 1 + (alpha**2 * (1 + alpha) + alpha * sigma) / (1 - alpha**2)
    return delta, lambda_upper_bound(alpha, delta, sigma)


def schedule_theorem32_alpha(k, p, residual_term, gamma, lambda_k, cap=0.05) -> float:
    """``min(1 / (k^2 ||p + gamma*lambda_k*residual_term||^2), cap)``.

    `residual_term` is ``M u_{k+1} + N v_k - b``. A zero norm yields `cap`.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sq = frobenius_norm(p + gamma * lambda_k * residual_term) ** 2
    if sq == 0.0:
        return float(cap)
    return min(1.0 / (k * k * sq), float(cap))


@dataclass(frozen=True)
class SummableAlpha:
    """Adaptive inertia for Algorithm 1 making ``sum alpha_{k+1}||.||^2`` finite."""

    cap: float = 0.05

    def __call__(self, k, p, residual, gamma, lam):
        return schedule_theorem32_alpha(k, p, residual, gamma, lam, self.cap)


Schedule = Union[float, Callable]


def _at(schedule, k, *args) -> float:
    return float(schedule(k, *args)) if callable(schedule) else float(schedule)


@dataclass(frozen=True)
class AdmmParams:
    """Solver configuration.

    ``lam`` is a constant or ``lam(k)``. ``alpha`` is a constant or a
    callable: ``alpha(k)`` for ``iadmm_chen`` and
    ``alpha(k, p_k, r_k, gamma, lam_k)`` for ``algorithm1``, where
    ``r_k = M u_{k+1} + N v_k - b`` (see :class:`SummableAlpha`).

    ``mode`` selects how ``algorithm1`` parameters are validated:
    ``"theorem31"`` (constant inertia, relaxation bounded through
    ``sigma``/``delta``), ``"theorem32"`` (static bounds only) or ``None``.
    """

    gamma: float = 0.01
    variant: str = "algorithm1"
    lam: Schedule = 1.0
    alpha: Schedule = 0.0
    s_scale: float = 0.0
    t_scale: float = 0.0
    epsilon: float = 1e-7
    max_iter: int = 1000
    mode: Optional[str] = None
    sigma: float = 0.01
    delta: Optional[float] = None

    def lam_at(self, k):
        return _at(self.lam, k)

    @classmethod
    def classical(cls, gamma=0.01, **kw):
        return cls(gamma=gamma, variant="classical", **kw)

    @classmethod
    def gadmm(cls, lam=1.6, gamma=0.01, **kw):
        return cls(gamma=gamma, variant="gadmm", lam=lam, **kw)

    @classmethod
    def iadmm_chen(cls, alpha=0.3, gamma=0.01, s_scale=0.0, t_scale=0.0, **kw):
        return cls(gamma=gamma, variant="iadmm_chen", alpha=alpha,
                   s_scale=s_scale, t_scale=t_scale, **kw)

    @classmethod
    def algorithm1(cls, alpha=0.2, lam=None, gamma=0.01, sigma=0.01, **kw):
        """Constant inertia; `lam` defaults to the matched relaxation."""
        delta, matched = schedule_theorem31(alpha, sigma)
        return cls(gamma=gamma, variant="algorithm1", alpha=alpha,
                   lam=matched if lam is None else lam, mode="theorem31",
                   sigma=sigma, delta=delta, **kw)

    @classmethod
    def algorithm1_summable(cls, lam=1.5, cap=0.05, gamma=0.01, **kw):
        return cls(gamma=gamma, variant="algorithm1", alpha=SummableAlpha(cap),
                   lam=lam, mode="theorem32", **kw)

    def validate(self, horizon: int = 1000) -> None:
        """Raise :class:`ConfigurationError` on inconsistent parameters."""
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        if not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        ks = range(1, horizon + 1)
        v = self.variant
        if v == "classical":
            if callable(self.lam) or self.lam != 1.0 or callable(self.alpha) or self.alpha != 0.0:
                raise ConfigurationError("classical ADMM has lam = 1 and alpha = 0")
        elif v == "gadmm":
            lams = [self.lam_at(k) for k in ks]
            if not all(0 < x < 2 for x in lams):
                raise ConfigurationError(f"gadmm needs lam_k in (0, 2), got range "
                                         f"[{min(lams)}, {max(lams)}]")
            if callable(self.alpha) or self.alpha != 0.0:
                raise ConfigurationError("gadmm has no inertia")
        elif v == "iadmm_chen":
            alphas = [_at(self.alpha, k) for k in ks]
            if not all(0 <= a < 1 for a in alphas):
                raise ConfigurationError("iadmm_chen needs alpha_k in [0, 1)")
            if self.s_scale < 0 or self.t_scale < 0:
                raise ConfigurationError("proximal scales must be non-negative")
        elif self.mode is not None:
            report = validate_params(self.as_dr_params(), horizon)
            if not report.ok:
                raise ConfigurationError(f"algorithm1 parameters: {report}")

    def as_dr_params(self) -> DrParams:
        """The equivalent Douglas-Rachford parameters on the dual."""
        if self.mode == "theorem32":
            # an adaptive rule is checked through its cap; summability holds online
            if isinstance(self.alpha, SummableAlpha):
                bar = self.alpha.cap
            elif callable(self.alpha):
                raise ConfigurationError("theorem32 mode needs SummableAlpha or a constant")
            else:
                bar = float(self.alpha)
            return DrParams(gamma=self.gamma, alpha=bar, lam=self.lam, alpha_bar=bar,
                            mode="theorem22")
        if callable(self.alpha):
            raise ConfigurationError("theorem31 mode needs a constant alpha")
        delta = self.delta
        if delta is None:
            delta = schedule_theorem31(float(self.alpha), self.sigma)[0]
        return DrParams(gamma=self.gamma, alpha=float(self.alpha), lam=self.lam,
                        alpha_bar=float(self.alpha), sigma=self.sigma, delta=delta,
                        mode="theorem21")


# -- subproblems -------------------------------------------------------------


class SubproblemOracle:
    """Solves the two argmin steps.

    ``solve_u`` returns
    ``argmin_u F(u) + gamma/2 ||M u - target||^2 + weight/2 ||u - center||^2``
    and ``solve_v`` the same with ``G`` and ``N``.
    """

    def solve_u(self, problem, target, gamma, weight=0.0, center=None):
        raise NotImplementedError

    def solve_v(self, problem, target, gamma, weight=0.0, center=None):
        raise NotImplementedError


def _closed_form(f, c, target, gamma, weight, center):
    # f(u) + gamma/2||c u - t||^2 + w/2||u - z||^2
    #   = f(u) + (gamma c^2 + w)/2 ||u - (gamma c t + w z)/(gamma c^2 + w)||^2 + const
    curv = gamma * c * c + weight
    point = gamma * c * target
    if weight:
        point = point + weight * center
    return f.prox(point / curv, 1.0 / curv)


class ClosedFormOracle(SubproblemOracle):
    """Prox-based solution when ``M`` and ``N`` are scaled identities."""

    def solve_u(self, problem, target, gamma, weight=0.0, center=None):
        return _closed_form(problem.F, problem.M.scale, target, gamma, weight, center)

    def solve_v(self, problem, target, gamma, weight=0.0, center=None):
        return _closed_form(problem.G, problem.N.scale, target, gamma, weight, center)


def resolve_oracle(problem: TwoBlockProblem, oracle: Optional[SubproblemOracle]):
    if oracle is not None:
        return oracle
    missing = [n for n, op in (("M", problem.M), ("N", problem.N)) if op.scale is None]
    if missing:
        raise ConfigurationError(
            f"{' and '.join(missing)} not a scaled identity; supply a SubproblemOracle"
        )
    return ClosedFormOracle()


# -- state -------------------------------------------------------------------


@dataclass(frozen=True)
class AdmmState:
    u: np.ndarray
    v: np.ndarray
    y: np.ndarray
    p: np.ndarray
    u_prev: np.ndarray
    v_prev: np.ndarray
    y_prev: np.ndarray
    iteration: int = 0
    alpha: float = 0.0  # inertia used by the last step
    inertia_term: float = 0.0  # alpha_{k+1} ||p_k + gamma lam_k r_k||^2 (algorithm1)

    @classmethod
    def initial(cls, problem: TwoBlockProblem, u=None, v=None, y=None) -> "AdmmState":
        """Zeros unless given; the history equals the start so first differences vanish."""
        u = np.zeros(problem.u_shape) if u is None else np.asarray(u, dtype=np.float64)
        v = np.zeros(problem.v_shape) if v is None else np.asarray(v, dtype=np.float64)
        y = np.zeros(problem.b.shape) if y is None else np.asarray(y, dtype=np.float64)
        return cls(u=u, v=v, y=y, p=np.zeros_like(y), u_prev=u, v_prev=v, y_prev=y)

    def advance(self, u, v, y, p=None, **extra) -> "AdmmState":
        return AdmmState(
            u=u, v=v, y=y, p=self.p if p is None else p,
            u_prev=self.u, v_prev=self.v, y_prev=self.y,
            iteration=self.iteration + 1, **extra,
        )


# -- steps -------------------------------------------------------------------


def step_classical(state, problem, params, oracle=None) -> AdmmState:
    oracle = oracle or resolve_oracle(problem, None)
    M, N, b, g = problem.M, problem.N, problem.b, params.gamma
    u = oracle.solve_u(problem, b - N.apply(state.v) - state.y / g, g)
    Mu = M.apply(u)
    v = oracle.solve_v(problem, b - Mu - state.y / g, g)
    y = state.y + g * (Mu + N.apply(v) - b)
    return state.advance(u, v, y)


def step_gadmm(state, problem, params, oracle=None) -> AdmmState:
    oracle = oracle or resolve_oracle(problem, None)
    M, N, b, g = problem.M, problem.N, problem.b, params.gamma
    lam = params.lam_at(state.iteration + 1)
    Nv = N.apply(state.v)
    u = oracle.solve_u(problem, b - Nv - state.y / g, g)
    r = M.apply(u) + Nv - b
    v = oracle.solve_v(problem, Nv - lam * r - state.y / g, g)
    y = state.y + g * (N.apply(v) - Nv + lam * r)
    return state.advance(u, v, y)


def step_iadmm_chen(state, problem, params, oracle=None) -> AdmmState:
    oracle = oracle or resolve_oracle(problem, None)
    M, N, b, g = problem.M, problem.N, problem.b, params.gamma
    a = _at(params.alpha, state.iteration + 1)
    u_bar = state.u + a * (state.u - state.u_prev)
    v_bar = state.v + a * (state.v - state.v_prev)
    y_bar = state.y + a * (state.y - state.y_prev)
    Nv_bar = N.apply(v_bar)
    u = oracle.solve_u(problem, b - Nv_bar - y_bar / g, g, params.s_scale, u_bar)
    Mu = M.apply(u)
    y = y_bar + g * (Mu + Nv_bar - b)
    v = oracle.solve_v(problem, b - Mu - y / g, g, params.t_scale, v_bar)
    return state.advance(u, v, y, alpha=a)


def step_reordered(state, problem, params, oracle=None) -> AdmmState:
    """ADMM with update order u -> y -> v."""
    oracle = oracle or resolve_oracle(problem, None)
    M, N, b, g = problem.M, problem.N, problem.b, params.gamma
    Nv = N.apply(state.v)
    u = oracle.solve_u(problem, b - Nv - state.y / g, g)
    Mu = M.apply(u)
    y = state.y + g * (Mu + Nv - b)
    v = oracle.solve_v(problem, b - Mu - y / g, g)
    return state.advance(u, v, y)


def step_algorithm1(state, problem, params, oracle=None) -> AdmmState:
    """One pass of the inertial ADMM.

    With ``a = alpha_{k+1}``, ``l = lambda_k`` and
    ``r = M u_{k+1} + N v_k - b``::

        u_{k+1} = argmin F(u) + <y_k, M u> + g/2 ||M u + N v_k - b||^2
        v_{k+1} = argmin G(v) + <y_k + a p_k, N v>
                         + g/2 ||N(v - v_k) + (1 + a) l r||^2
        y_{k+1} = y_k + a p_k + g [N(v_{k+1} - v_k) + (1 + a) l r]
        p_{k+1} = a [p_k + g l r]

    ``a`` is evaluated once ``u_{k+1}`` is known, so adaptive rules may
    depend on ``r``.
    """
    oracle = oracle or resolve_oracle(problem, None)
    M, N, b, g = problem.M, problem.N, problem.b, params.gamma
    k = state.iteration + 1
    lam = params.lam_at(k)
    Nv = N.apply(state.v)
    u = oracle.solve_u(problem, b - Nv - state.y / g, g)
    r = M.apply(u) + Nv - b
    if callable(params.alpha):
        a = float(params.alpha(k, state.p, r, g, lam))
    else:
        a = float(params.alpha)
    q = state.y + a * state.p
    step = (1.0 + a) * lam * r
    v = oracle.solve_v(problem, Nv - step - q / g, g)
    y = q + g * (N.apply(v) - Nv + step)
    drift = state.p + g * lam * r
    p = a * drift
    return state.advance(u, v, y, p=p, alpha=a,
                         inertia_term=a * frobenius_norm(drift) ** 2)


STEPS = {
    "classical": step_classical,
    "gadmm": step_gadmm,
    "iadmm_chen": step_iadmm_chen,
    "algorithm1": step_algorithm1,
}


# -- stopping and diagnostics ------------------------------------------------


def _rel(new, old) -> float:
    num = frobenius_norm(new - old)
    den = frobenius_norm(old)
    if den == 0.0:
        return 0.0 if num == 0.0 else num
    return num / den


def _recon(problem, u, v):
    if problem is None:
        return u + v
    return problem.M.apply(u) + problem.N.apply(v)


def stopping_check(prev: AdmmState, curr: AdmmState, epsilon: float, problem=None):
    """Relative-change test between consecutive states.

    Returns ``(stop, rel_u, rel_v, rel_b)``; ``rel_b`` compares the
    reconstructions ``M u + N v`` (``u + v`` when `problem` is omitted).
    A zero denominator makes the ratio the bare numerator norm.
    """
    rel_u = _rel(curr.u, prev.u)
    rel_v = _rel(curr.v, prev.v)
    rel_b = _rel(_recon(problem, curr.u, curr.v), _recon(problem, prev.u, prev.v))
    return max(rel_u, rel_v, rel_b) <= epsilon, rel_u, rel_v, rel_b


def numerical_rank(x: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = svd(x).s
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


@dataclass(frozen=True)
class Diagnostics:
    rel_u: float
    rel_v: float
    rel_b: float
    primal_obj: float
    dual_obj: Optional[float]
    kkt_residuals: tuple
    rank_u: int


def diagnostics(problem: TwoBlockProblem, state: AdmmState, params: AdmmParams) -> Diagnostics:
    """KKT residuals, objectives, rank and relative changes for `state`.

    Stationarity residuals are prox fixed-point gaps,
    ``||u - prox_F(u - M^T y)||`` and ``||v - prox_G(v - N^T y)||``; both
    vanish exactly at a KKT point. The dual objective pairs ``y_k`` with
    ``x_k = y_k + gamma (M u_{k+1} + N v_k - b)`` and is reported only when
    both conjugates are available.
    """
    F, G, M, N, b = problem.F, problem.G, problem.M, problem.N, problem.b
    u, v, y = state.u, state.v, state.y
    r1 = frobenius_norm(u - F.prox(u - M.adjoint(y), 1.0))
    r2 = frobenius_norm(v - G.prox(v - N.adjoint(y), 1.0))
    r3 = frobenius_norm(problem.residual(u, v))
    dual = None
    if F.has_conjugate and G.has_conjugate:
        y_k = state.y_prev if state.iteration else y
        v_k = state.v_prev if state.iteration else v
        x_k = y_k + params.gamma * problem.residual(u, v_k)
        dual = (-F.conjugate_value(-M.adjoint(x_k))
                - G.conjugate_value(-N.adjoint(y_k)) - inner(y_k, b))
    _, rel_u, rel_v, rel_b = stopping_check(_previous(state), state, math.inf, problem)
    return Diagnostics(
        rel_u=rel_u, rel_v=rel_v, rel_b=rel_b,
        primal_obj=F.value(u) + G.value(v),
        dual_obj=dual,
        kkt_residuals=(r1, r2, r3),
        rank_u=numerical_rank(u),
    )


def _previous(state):
    return replace(state, u=state.u_prev, v=state.v_prev, y=state.y_prev)


# -- driver ------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    rel_u: float
    rel_v: float
    rel_b: float
    primal_obj: float  # F(u_{k+1}) + G(v_k)
    r3: float  # ||M u + N v - b||_F


@dataclass
class SolveReport:
    state: AdmmState
    status: str  # "converged" | "budget-exhausted" | "diverged"
    iterations: int
    rel_u: float
    rel_v: float
    rel_b: float
    wall_time: float
    trace: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    inertia_terms: list = field(default_factory=list)

    @property
    def u(self):
        return self.state.u

    @property
    def v(self):
        return self.state.v

    @property
    def y(self):
        return self.state.y

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def solve(
    problem: TwoBlockProblem,
    params: AdmmParams,
    oracle: Optional[SubproblemOracle] = None,
    state: Optional[AdmmState] = None,
    trace: bool = False,
    callback=None,
) -> SolveReport:
    """Run ``params.variant`` until the relative changes drop below epsilon.

    The stopping test runs after each full iteration. With ``trace=True``
    every iteration appends a :class:`TraceRow`, which costs one extra
    evaluation of ``F`` per iteration. ``callback(state)`` is invoked after
    each step.
    """
    params.validate()
    oracle = resolve_oracle(problem, oracle)
    step = STEPS[params.variant]
    state = AdmmState.initial(problem) if state is None else state
    report = SolveReport(state=state, status="budget-exhausted", iterations=0,
                         rel_u=math.inf, rel_v=math.inf, rel_b=math.inf, wall_time=0.0)
    t0 = time.perf_counter()
    for _ in range(params.max_iter):
        new = step(state, problem, params, oracle)
        if not all(np.all(np.isfinite(a)) for a in (new.u, new.v, new.y, new.p)):
            log.warning("%s diverged at iteration %d", params.variant, new.iteration)
            report.status = "diverged"
            break
        stop, ru, rv, rb = stopping_check(state, new, params.epsilon, problem)
        state = new
        report.rel_u, report.rel_v, report.rel_b = ru, rv, rb
        report.alphas.append(new.alpha)
        report.inertia_terms.append(new.inertia_term)
        if trace:
            obj = problem.F.value(new.u) + problem.G.value(new.v_prev)
            r3 = frobenius_norm(problem.residual(new.u, new.v))
            report.trace.append(TraceRow(new.iteration, ru, rv, rb, obj, r3))
        if callback is not None:
            callback(new)
        if stop:
            report.status = "converged"
            break
    report.state = state
    report.iterations = state.iteration
    report.wall_time = time.perf_counter() - t0
    return report


def run_steps(problem, params, n, oracle=None, state=None, step=None):
    """Take exactly `n` steps without stopping tests; returns every state."""
    oracle = resolve_oracle(problem, oracle)
    step = step or STEPS[params.variant]
    state = AdmmState.initial(problem) if state is None else state
    out = [state]
    for _ in range(n):
        state = step(state, problem, params, oracle)
        if not np.all(np.isfinite(state.u)):
            raise DivergedError(f"non-finite iterate at step {state.iteration}", out[-1])
        out.append(state)
    return out
