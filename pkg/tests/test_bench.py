import csv

import numpy as np
import pytest

from iadmm import cli
from iadmm.admm import ConfigurationError
from iadmm.bench import (FIELDS, PAPER_SOLVERS, PRESETS, STATUSES, ExperimentConfig, ResultRow,
                         SolverSpec, dump_config, emit_csv, load_config, param_table,
                         print_param_table, run_cell, run_experiment, trace_path)

TINY = dict(orders=(30,), seeds=(0, 1, 2), max_iter=300)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_cartesian_row_count(tmp_path):
    config = ExperimentConfig(solvers=PAPER_SOLVERS[:2], output=str(tmp_path / "r.csv"), **TINY)
    rows = run_experiment(config)
    assert len(rows) == 6
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 7 and lines[0] == ",".join(FIELDS)
    assert all(r.status in STATUSES for r in rows)


def test_empty_rows_give_header_only(tmp_path):
    emit_csv([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(FIELDS) + "\n"


def test_float_precision(tmp_path):
    row = ResultRow("x", 10, 1, 5, 1e-7, 0, 12, 1 / 3, 2 / 3, 1, None, "converged")
    emit_csv([row], tmp_path / "p.csv")
    line = read_csv(tmp_path / "p.csv")[1]
    assert float(line[FIELDS.index("rel_u_star")]) == 1 / 3
    assert line[FIELDS.index("wall_time")] == ""


def test_byte_identical_reruns(tmp_path):
    base = ExperimentConfig(orders=(30,), seeds=(0, 1), max_iter=200)
    run_experiment(ExperimentConfig(**{**base.__dict__, "output": str(tmp_path / "a.csv")}))
    run_experiment(ExperimentConfig(**{**base.__dict__, "output": str(tmp_path / "b.csv")}))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_parallel_workers_give_same_bytes(tmp_path):
    base = dict(orders=(25,), seeds=(0, 1), max_iter=200)
    run_experiment(ExperimentConfig(**base, output=str(tmp_path / "s.csv")))
    run_experiment(ExperimentConfig(**base, workers=2, output=str(tmp_path / "p.csv")))
    assert (tmp_path / "s.csv").read_bytes() == (tmp_path / "p.csv").read_bytes()


def test_config_round_trip(tmp_path):
    config = ExperimentConfig(
        orders=(40, 60), rank_fractions=(0.05, 0.1), sparsity_fractions=(0.1,),
        epsilons=(1e-6, 1e-7), gamma=0.02, seeds=(3, 9), output="out/x.csv", max_iter=77,
        solvers=PAPER_SOLVERS + (SolverSpec('chen "prox"', "iadmm_chen", alpha=0.1,
                                            s_scale=0.5, t_scale=0.25),),
    )
    path = tmp_path / "c.toml"
    path.write_text(dump_config(config))
    assert load_config(path) == config


def test_config_paper_scale_and_unknown_keys(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[experiment]\npaper_scale = true\n")
    assert load_config(path).orders == (500, 800, 1000)
    path.write_text("[experiment]\nbogus = 1\n")
    with pytest.raises(ConfigurationError, match="bogus"):
        load_config(path)


@pytest.mark.parametrize("kw", [
    dict(rank_fractions=(0.0,)),
    dict(sparsity_fractions=(1.5,)),
    dict(seeds=()),
    dict(solvers=()),
    dict(solvers=(SolverSpec("bad", "gadmm", lam=2.5),)),
    dict(solvers=(SolverSpec("bad", "algorithm1", alpha=0.3, lam=1.5),)),
])
def test_invalid_configs_rejected_up_front(kw):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**kw).validate()


def test_solve_failure_becomes_row(monkeypatch):
    import iadmm.bench as bench

    def boom(*a, **k):
        raise FloatingPointError("overflow")

    monkeypatch.setattr(bench, "solve", boom)
    cell = next(ExperimentConfig(orders=(10,), seeds=(0,)).cells())
    row = run_cell(cell, 0.01, 10)
    assert row.status == "diverged" and np.isnan(row.rel_u_star)


def test_io_error_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_csv([], blocker / "sub" / "r.csv")


def test_converged_rows_reverified_from_traces(tmp_path):
    config = ExperimentConfig(trace_dir=str(tmp_path), **TINY)
    rows = run_experiment(config)
    for cell, row in zip(config.cells(), rows):
        trace = read_csv(trace_path(tmp_path, cell))
        assert trace[0] == ["iteration", "rel_u", "rel_v", "rel_b", "primal_obj", "r3"]
        assert len(trace) - 1 == row.iterations
        if row.status == "converged":
            assert max(float(x) for x in trace[-1][1:4]) <= row.epsilon


def test_desk_grid_reverified_from_traces(desk_grid):
    rows, trace_dir, config = desk_grid
    assert len(rows) == 100
    for cell, row in zip(config.cells(), rows):
        assert row.status == "converged"
        last = read_csv(trace_path(trace_dir, cell))[-1]
        assert max(float(x) for x in last[1:4]) <= row.epsilon


def test_desk_grid_ordering(desk_grid):
    rows = desk_grid[0]
    key = lambda r: (r.m, r.r, r.nnz, r.epsilon, r.seed)  # noqa: E731
    admm = {key(r): r.iterations for r in rows if r.solver == "ADMM"}
    gadmm = [r for r in rows if r.solver == "GADMM"]
    strictly_fewer = sum(r.iterations < admm[key(r)] for r in gadmm)
    assert strictly_fewer >= 0.8 * len(gadmm)


def test_param_table_rows(capsys):
    print_param_table((0.0, 0.05, 0.3))
    out = capsys.readouterr().out.splitlines()
    assert out[1].split() == ["0.0000", "1.0000", "1.9802"]
    assert out[2].split()[2] == "1.7874"
    assert out[3].split()[2] == "0.9243"
    assert param_table([0.2])[0][2] == pytest.approx(1.249609, abs=1e-6)


def test_presets_cover_paper_solvers():
    assert set(PRESETS.values()) == set(PAPER_SOLVERS)


def test_cli_param_table(capsys):
    assert cli.main(["param-table", "--alphas", "0.1,0.2"]) == 0
    out = capsys.readouterr().out
    assert "1.6019" in out and "1.2496" in out
    assert cli.main(["param-table", "--alphas", "1.0"]) == 2


def test_cli_verify(capsys):
    assert cli.main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4 and "FAIL" not in out


def test_cli_run_single_solver(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = cli.main(["run", "--m", "30", "--seed", "0,1", "--solver", "algorithm1",
                     "--alpha", "0.1", "--lam", "1.5", "--name", "mine", "-o", str(out),
                     "--trace-dir", str(tmp_path / "t")])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 3 and rows[1][0] == "mine"
    assert len(list((tmp_path / "t").iterdir())) == 2


def test_cli_summable_rule_and_timing(tmp_path):
    out = tmp_path / "run.csv"
    assert cli.main(["run", "--m", "30", "--seed", "0", "--solver", "algorithm1",
                     "--alpha-rule", "summable", "--cap", "0.05", "--lam", "1.5",
                     "--timing", "-o", str(out)]) == 0
    row = read_csv(out)[1]
    assert float(row[FIELDS.index("wall_time")]) > 0


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(dump_config(ExperimentConfig(orders=(25,), seeds=(4,),
                                                solvers=PAPER_SOLVERS[:1])))
    out = tmp_path / "o.csv"
    assert cli.main(["run", "--config", str(cfg), "-o", str(out)]) == 0
    assert len(read_csv(out)) == 2


def test_cli_rejects_bad_parameters(tmp_path, capsys):
    code = cli.main(["run", "--m", "20", "--solver", "algorithm1", "--alpha", "0.3",
                     "--lam", "1.5", "-o", str(tmp_path / "x.csv")])
    assert code == 2
    assert "lambda" in capsys.readouterr().err
