"""RPCP benchmark sweeps: configuration, execution and CSV output."""

from __future__ import annotations

import csv
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .admm import AdmmParams, ConfigurationError, schedule_theorem31, solve
from .rpcp import as_problem, generate, recovery_metrics

__all__ = [
    "DESK_ORDERS",
    "PAPER_ORDERS",
    "PAPER_SOLVERS",
    "ExperimentConfig",
    "ResultRow",
    "SolverSpec",
    "emit_csv",
    "load_config",
    "param_table",
    "print_param_table",
    "run_experiment",
]

log = logging.getLogger(__name__)

DESK_ORDERS = (100, 200)
PAPER_ORDERS = (500, 800, 1000)
STATUSES = ("converged", "budget-exhausted", "diverged")


@dataclass(frozen=True)
class SolverSpec:
    """One solver column of a sweep.

    ``alpha_rule`` is ``"constant"`` or ``"summable"`` (the adaptive
    ``min(1/(k^2 ||.||^2), cap)`` inertia). For ``algorithm1`` with a
    constant rule and no ``lam`` the matched relaxation is used.
    """

    name: str
    variant: str
    lam: Optional[float] = None
    alpha: float = 0.0
    alpha_rule: str = "constant"
    cap: float = 0.05
    sigma: float = 0.01
    s_scale: float = 0.0
    t_scale: float = 0.0

    def params(self, gamma: float, epsilon: float, max_iter: int) -> AdmmParams:
        common = dict(gamma=gamma, epsilon=epsilon, max_iter=max_iter)
        v = self.variant
        if v == "classical":
            return AdmmParams.classical(**common)
        if v == "gadmm":
            return AdmmParams.gadmm(1.6 if self.lam is None else self.lam, **common)
        if v == "iadmm_chen":
            return AdmmParams.iadmm_chen(self.alpha, s_scale=self.s_scale,
                                         t_scale=self.t_scale, **common)
        if v == "algorithm1":
            if self.alpha_rule == "summable":
                return AdmmParams.algorithm1_summable(
                    1.5 if self.lam is None else self.lam, cap=self.cap, **common)
            if self.alpha_rule == "constant":
                return AdmmParams.algorithm1(self.alpha, lam=self.lam,
                                             sigma=self.sigma, **common)
            raise ConfigurationError(f"unknown alpha_rule {self.alpha_rule!r}")
        raise ConfigurationError(f"unknown variant {v!r}")


PAPER_SOLVERS = (
    SolverSpec("ADMM", "classical"),
    SolverSpec("GADMM", "gadmm", lam=1.6),
    SolverSpec("iADMM_Chen", "iadmm_chen", alpha=0.3),
    SolverSpec("Algorithm 1-1", "algorithm1", alpha=0.2, lam=1.2496),
    SolverSpec("Algorithm 1-2", "algorithm1", lam=1.5, alpha_rule="summable", cap=0.05),
)


@dataclass(frozen=True)
class ExperimentConfig:
    orders: tuple = DESK_ORDERS
    rank_fractions: tuple = (0.05,)
    sparsity_fractions: tuple = (0.05,)
    epsilons: tuple = (1e-7,)
    gamma: float = 0.01
    solvers: tuple = PAPER_SOLVERS
    seeds: tuple = (0, 1, 2, 3, 4)
    output: Optional[str] = None
    max_iter: int = 1000
    trace_dir: Optional[str] = None
    timing: bool = False
    workers: int = 1

    def validate(self) -> None:
        if not self.orders or min(self.orders) < 1:
            raise ConfigurationError("need at least one positive matrix order")
        for name in ("rank_fractions", "sparsity_fractions"):
            vals = getattr(self, name)
            if not vals or not all(0 < f <= 1 for f in vals):
                raise ConfigurationError(f"{name} must be non-empty and in (0, 1]")
        if not self.epsilons or min(self.epsilons) <= 0:
            raise ConfigurationError("epsilons must be positive")
        if not self.solvers:
            raise ConfigurationError("at least one solver is required")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate solver names in {names}")
        for spec in self.solvers:
            spec.params(self.gamma, min(self.epsilons), self.max_iter).validate()

    def cells(self):
        """Sweep cells in a fixed order: m, r, nnz, epsilon, seed, solver."""
        for m, rf, sf, eps, seed, spec in itertools.product(
            self.orders, self.rank_fractions, self.sparsity_fractions,
            self.epsilons, self.seeds, self.solvers,
        ):
            r = max(1, int(round(rf * m)))
            nnz = int(round(sf * m * m))
            yield Cell(m, r, nnz, eps, seed, spec)


@dataclass(frozen=True)
class Cell:
    m: int
    r: int
    nnz: int
    epsilon: float
    seed: int
    spec: SolverSpec


@dataclass(frozen=True)
class ResultRow:
    solver: str
    m: int
    r: int
    nnz: int
    epsilon: float
    seed: int
    iterations: int
    rel_u_star: float
    rel_v_star: float
    rank_u: int
    wall_time: Optional[float]
    status: str


FIELDS = tuple(f.name for f in fields(ResultRow))
TRACE_FIELDS = ("iteration", "rel_u", "rel_v", "rel_b", "primal_obj", "r3")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.15e}"
    return str(x)


def trace_path(trace_dir, cell: Cell) -> Path:
    safe = "".join(ch if ch.isalnum() else "_" for ch in cell.spec.name)
    return Path(trace_dir) / (
        f"{safe}_m{cell.m}_r{cell.r}_nnz{cell.nnz}_eps{cell.epsilon:g}_seed{cell.seed}.csv"
    )


def run_cell(cell: Cell, gamma: float, max_iter: int, trace_dir=None, timing=False) -> ResultRow:
    params = cell.spec.params(gamma, cell.epsilon, max_iter)
    inst = generate(cell.m, cell.r, cell.nnz, cell.seed)
    base = dict(solver=cell.spec.name, m=cell.m, r=cell.r, nnz=cell.nnz,
                epsilon=cell.epsilon, seed=cell.seed)
    try:
        report = solve(as_problem(inst), params, trace=trace_dir is not None)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        log.error("%s failed on m=%d seed=%d: %s", cell.spec.name, cell.m, cell.seed, exc)
        return ResultRow(**base, iterations=0, rel_u_star=float("nan"),
                         rel_v_star=float("nan"), rank_u=0, wall_time=None,
                         status="diverged")
    if trace_dir is not None:
        path = trace_path(trace_dir, cell)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_FIELDS)
            for t in report.trace:
                w.writerow([_fmt(getattr(t, k)) for k in TRACE_FIELDS])
    rel_u, rel_v, rank = recovery_metrics(inst, report.u, report.v)
    return ResultRow(**base, iterations=report.iterations, rel_u_star=rel_u,
                     rel_v_star=rel_v, rank_u=rank,
                     wall_time=report.wall_time if timing else None,
                     status=report.status)


def _run_cell_args(args):
    return run_cell(*args)


def _open_csv(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(FIELDS)
    return fh, writer


def _row_values(row: ResultRow):
    return [_fmt(getattr(row, k)) for k in FIELDS]


def emit_csv(rows, path) -> Path:
    """Write `rows` with a header line; floats carry 16 significant digits."""
    fh, writer = _open_csv(path)
    with fh:
        for row in rows:
            writer.writerow(_row_values(row))
    return Path(path)


def run_experiment(config: ExperimentConfig, echo=None) -> list:
    """Run every cell of `config`.

    When ``config.output`` is set each row is appended and flushed as soon
    as its cell finishes, so an interrupted sweep keeps its rows. Rows come
    out in cell order regardless of ``workers``.
    """
    config.validate()
    cells = list(config.cells())
    jobs = [(c, config.gamma, config.max_iter, config.trace_dir, config.timing) for c in cells]
    rows = []
    fh = writer = None
    if config.output:
        fh, writer = _open_csv(config.output)
    try:
        if config.workers > 1:
            pool = ProcessPoolExecutor(max_workers=config.workers)
            results = pool.map(_run_cell_args, jobs)
        else:
            pool = None
            results = map(_run_cell_args, jobs)
        for row in results:
            rows.append(row)
            if writer is not None:
                writer.writerow(_row_values(row))
                fh.flush()
            if echo is not None:
                echo(f"{row.solver:<14} m={row.m:<5} r={row.r:<4} seed={row.seed:<3} "
                     f"k={row.iterations:<5} rel_u*={row.rel_u_star:.4e} "
                     f"rel_v*={row.rel_v_star:.4e} rank={row.rank_u} {row.status}")
        if pool is not None:
            pool.shutdown()
    finally:
        if fh is not None:
            fh.close()
    return rows


# -- config files ------------------------------------------------------------


def _solver_from_table(t: dict) -> SolverSpec:
    known = {f.name for f in fields(SolverSpec)}
    unknown = set(t) - known
    if unknown:
        raise ConfigurationError(f"unknown solver keys {sorted(unknown)}")
    return SolverSpec(**t)


def load_config(path) -> ExperimentConfig:
    """Read a TOML sweep description.

    Top-level ``[experiment]`` keys mirror :class:`ExperimentConfig`;
    ``paper_scale = true`` swaps in the large matrix orders. Each
    ``[[solvers]]`` table is a :class:`SolverSpec`.
    """
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    exp = dict(data.get("experiment", {}))
    paper = exp.pop("paper_scale", False)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(exp) - known
    if unknown:
        raise ConfigurationError(f"unknown experiment keys {sorted(unknown)}")
    for key in ("orders", "rank_fractions", "sparsity_fractions", "epsilons", "seeds"):
        if key in exp:
            exp[key] = tuple(exp[key])
    if paper and "orders" not in exp:
        exp["orders"] = PAPER_ORDERS
    if "solvers" in data:
        exp["solvers"] = tuple(_solver_from_table(t) for t in data["solvers"])
    return ExperimentConfig(**exp)


def dump_config(config: ExperimentConfig) -> str:
    """TOML text that :func:`load_config` reads back to `config`."""

    def val(x):
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, str):
            return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
        if isinstance(x, (tuple, list)):
            return "[" + ", ".join(val(e) for e in x) + "]"
        return repr(x)

    lines = ["[experiment]"]
    for f in fields(ExperimentConfig):
        x = getattr(config, f.name)
        if f.name == "solvers" or x is None:
            continue
        lines.append(f"{f.name} = {val(x)}")
    for spec in config.solvers:
        lines += ["", "[[solvers]]"]
        for k, x in asdict(spec).items():
            if x is not None:
                lines.append(f"{k} = {val(x)}")
    return "\n".join(lines) + "\n"


# -- relaxation table ----------------------------------------------------------


def param_table(alphas, sigma=0.01):
    return [(a, *schedule_theorem31(a, sigma)) for a in alphas]


def print_param_table(alphas=(0.05, 0.1, 0.2, 0.3), sigma=0.01, out=None):
    out = out or sys.stdout
    print(f"{'alpha':>8} {'delta':>10} {'lambda':>10}", file=out)
    for a, d, lam in param_table(alphas, sigma):
        print(f"{a:>8.4f} {d:>10.4f} {lam:>10.4f}", file=out)


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})


# referenced by the CLI's --solver presets
PRESETS = {
    "admm": PAPER_SOLVERS[0],
    "gadmm": PAPER_SOLVERS[1],
    "iadmm_chen": PAPER_SOLVERS[2],
    "algorithm1-1": PAPER_SOLVERS[3],
    "algorithm1-2": PAPER_SOLVERS[4],
}

