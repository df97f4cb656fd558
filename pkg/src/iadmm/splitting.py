"""Inertial Douglas-Rachford splitting for ``0 in A(x) + B(x)``.

One step with inertia ``a = alpha_k`` and relaxation ``l = lambda_k``::

    z      = w_k + a * (w_k - w_{k-1})
    y_k    = J_{gB}(z)
    x_k    = J_{gA}(2 y_k - z)
    w_{k+1} = z + l * (x_k - y_k)

The operators enter only through their resolvents, given as callables
``resolve(point, gamma)``. Runs start from ``w_0 = w_1``, which makes the
first inertial term vanish whatever ``alpha_1`` is.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .linalg import frobenius_norm
from .operators import Proximable, TwoBlockProblem, conjugate_prox

__all__ = [
    "DivergedError",
    "DrParams",
    "DrReport",
    "DrState",
    "ParamReport",
    "StoppingRule",
    "delta_threshold",
    "dr_solve",
    "dr_step",
    "dual_resolvents",
    "lambda_upper_bound",
    "prox_resolvent",
    "validate_params",
]

log = logging.getLogger(__name__)

Resolvent = Callable[[np.ndarray, float], np.ndarray]
Schedule = Union[float, Callable[[int], float]]


class DivergedError(ArithmeticError):
    """An iterate became non-finite; ``state`` is the last finite one."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


def _at(schedule: Schedule, k: int) -> float:
    return float(schedule(k)) if callable(schedule) else float(schedule)


def delta_threshold(alpha: float, sigma: float) -> float:
    """Strict lower bound ``(a^2 (1+a) + a s) / (1 - a^2)`` on delta."""
    return (alpha**2 * (1 + alpha) + alpha * sigma) / (1 - alpha**2)


def lambda_upper_bound(alpha: float, delta: float, sigma: float) -> float:
    """Largest relaxation admitted for inertia bound `alpha`."""
    c = alpha * (1 + alpha) + alpha * delta + sigma
    return 2 * (delta - alpha * c) / (delta * (1 + c))


@dataclass(frozen=True)
class DrParams:
    """Step size, schedules and the convergence regime they are checked against.

    ``alpha`` and ``lam`` are constants or callables of the iteration
    index ``k >= 1``. ``adaptive_alpha``, when given, replaces ``alpha``
    and is called as ``adaptive_alpha(k, w_k - w_{k-1})``; such rules are
    state dependent and can only be checked online.

    ``mode="theorem21"`` asks for a nondecreasing inertia bounded by
    ``alpha_bar`` together with the (delta, sigma) relaxation bound.
    ``mode="theorem22"`` only asks for static bounds ``alpha_k <= alpha_bar
    < 1`` and ``0 < lambda_k < 2``.
    """

    gamma: float
    alpha: Schedule = 0.0
    lam: Schedule = 1.0
    alpha_bar: float = 0.0
    sigma: float = 0.01
    delta: float = 1.0
    mode: str = "theorem21"
    adaptive_alpha: Optional[Callable[[int, np.ndarray], float]] = None

    def alpha_at(self, k: int) -> float:
        return _at(self.alpha, k)

    def lam_at(self, k: int) -> float:
        return _at(self.lam, k)


@dataclass
class ParamReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "; ".join(self.violations)


def validate_params(p: DrParams, horizon: int = 1000) -> ParamReport:
    """Check `p` against the parameter conditions of its ``mode``.

    Schedules are sampled on ``k = 1..horizon``. Each violation names the
    inequality with both sides evaluated.
    """
    report = ParamReport()
    bad = report.violations
    if p.mode not in ("theorem21", "theorem22"):
        bad.append(f"unknown mode {p.mode!r}")
        return report
    if not p.gamma > 0:
        bad.append(f"gamma > 0 fails: gamma = {p.gamma}")
    if not 0 <= p.alpha_bar < 1:
        bad.append(f"0 <= alpha < 1 fails: alpha = {p.alpha_bar}")
        return report

    ks = range(1, horizon + 1)
    lams = np.array([p.lam_at(k) for k in ks])
    if p.adaptive_alpha is None:
        alphas = np.array([p.alpha_at(k) for k in ks])
        if alphas.min() < 0 or alphas.max() > p.alpha_bar:
            bad.append(
                f"0 <= alpha_k <= alpha fails: alpha_k in [{alphas.min():.6g}, "
                f"{alphas.max():.6g}], alpha = {p.alpha_bar:.6g}"
            )
        if p.mode == "theorem21" and np.any(np.diff(alphas) < 0):
            k = int(np.argmax(np.diff(alphas) < 0)) + 1
            bad.append(
                f"alpha_k nondecreasing fails: alpha_{k} = {alphas[k - 1]:.6g} > "
                f"alpha_{k + 1} = {alphas[k]:.6g}"
            )
    elif p.mode == "theorem21":
        bad.append("theorem21 needs a static nondecreasing alpha schedule")

    if lams.min() <= 0:
        bad.append(f"lambda_k > 0 fails: min lambda_k = {lams.min():.6g}")

    if p.mode == "theorem21":
        a, s, d = p.alpha_bar, p.sigma, p.delta
        if not s > 0:
            bad.append(f"sigma > 0 fails: sigma = {s}")
        thr = delta_threshold(a, s)
        if not d > thr:
            bad.append(f"delta > (a^2(1+a)+a*s)/(1-a^2) fails: {d:.6g} <= {thr:.6g}")
        bound = lambda_upper_bound(a, d, s)
        if lams.max() > bound:
            bad.append(
                f"lambda_k <= 2(d-a[a(1+a)+a*d+s])/(d[1+a(1+a)+a*d+s]) fails: "
                f"{lams.max():.6g} > {bound:.6g}"
            )
    elif lams.max() >= 2:
        bad.append(f"lambda_k <= lambda_bar < 2 fails: max lambda_k = {lams.max():.6g} >= 2")
    return report


@dataclass(frozen=True)
class DrState:
    w_prev: np.ndarray
    w: np.ndarray
    y: np.ndarray
    x: np.ndarray
    iteration: int = 0
    fejer_sum: float = 0.0
    increment: float = 0.0  # ||w_{k+1} - w_k||^2 of the last step

    @classmethod
    def start(cls, w0) -> "DrState":
        w0 = np.asarray(w0, dtype=np.float64)
        return cls(w_prev=w0, w=w0, y=w0, x=w0)


def dr_step(state: DrState, A: Resolvent, B: Resolvent, p: DrParams) -> DrState:
    k = state.iteration + 1
    dw = state.w - state.w_prev
    if p.adaptive_alpha is not None:
        a = float(p.adaptive_alpha(k, dw))
    else:
        a = p.alpha_at(k)
    if not 0 <= a <= p.alpha_bar:
        raise ValueError(f"alpha_{k} = {a} outside [0, {p.alpha_bar}]")
    lam = p.lam_at(k)

    z = state.w + a * dw
    y = B(z, p.gamma)
    x = A(2 * y - z, p.gamma)
    w_next = z + lam * (x - y)
    if not (np.all(np.isfinite(w_next)) and np.all(np.isfinite(x))):
        raise DivergedError(f"non-finite iterate at step {k}", state)
    inc = frobenius_norm(w_next - state.w) ** 2
    return DrState(
        w_prev=state.w,
        w=w_next,
        y=y,
        x=x,
        iteration=k,
        fejer_sum=state.fejer_sum + inc,
        increment=inc,
    )


@dataclass(frozen=True)
class StoppingRule:
    tol: float = 1e-10
    max_iter: int = 10_000


@dataclass
class DrReport:
    y: np.ndarray
    x: np.ndarray
    w: np.ndarray
    iterations: int
    status: str  # "converged" | "budget-exhausted" | "diverged"
    increments: list
    fejer_sums: list
    gaps: list  # ||y_k - x_k||_F per step

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def dr_solve(
    A: Resolvent,
    B: Resolvent,
    p: DrParams,
    w0,
    stop: StoppingRule = StoppingRule(),
) -> DrReport:
    """Iterate until ``||y_k - x_k||_F <= stop.tol`` or the budget runs out."""
    state = DrState.start(w0)
    increments, sums, gaps = [], [], []
    status = "budget-exhausted"
    while state.iteration < stop.max_iter:
        try:
            state = dr_step(state, A, B, p)
        except DivergedError as exc:
            log.warning("%s", exc)
            state = exc.state or state
            status = "diverged"
            break
        increments.append(state.increment)
        sums.append(state.fejer_sum)
        gap = frobenius_norm(state.y - state.x)
        gaps.append(gap)
        if gap <= stop.tol:
            status = "converged"
            break
    return DrReport(
        y=state.y, x=state.x, w=state.w, iterations=state.iteration,
        status=status, increments=increments, fejer_sums=sums, gaps=gaps,
    )


def prox_resolvent(f: Proximable) -> Resolvent:
    """Resolvent of the subdifferential of `f`, i.e. its prox."""
    return lambda z, gamma: f.prox(z, gamma)


def _scale_of(op, name):
    if op.scale is None:
        raise NotImplementedError(
            f"dual resolvents need {name} to be a scaled identity, got {op!r}"
        )
    return op.scale


def dual_resolvents(problem: TwoBlockProblem) -> tuple[Resolvent, Resolvent]:
    """Resolvents of ``A = d(F* o -M*)`` and ``B = d(G* o -N*) + b``.

    Running :func:`dr_step` with these on the dual of `problem` reproduces
    the inertial ADMM iterates. Only scaled-identity ``M`` and ``N`` are
    supported; for ``h(x) = F*(-c x)`` one has
    ``prox_{g h}(z) = -prox_{g c^2 F*}(-c z) / c``.
    """
    c_m = _scale_of(problem.M, "M")
    c_n = _scale_of(problem.N, "N")
    F, G, b = problem.F, problem.G, problem.b

    def resolve_a(z, gamma):
        return -conjugate_prox(F, -c_m * z, gamma * c_m**2) / c_m

    def resolve_b(z, gamma):
        shifted = z - gamma * b
        return -conjugate_prox(G, -c_n * shifted, gamma * c_n**2) / c_n

    return resolve_a, resolve_b
