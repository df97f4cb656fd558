import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--paper-scale", action="store_true", default=False,
        help="run the slow checks at the published matrix sizes",
    )


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``criterion(n, passed, detail)`` logs one PASS/FAIL line and returns `passed`."""

    def log(n, passed, detail):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE].append(line)
        print(line)
        return passed

    return log


def pytest_collection_modifyitems(config, items):
    if config.getoption("--paper-scale"):
        return
    skip = pytest.mark.skip(reason="needs --paper-scale")
    for item in items:
        if "paper_scale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def desk_grid(tmp_path_factory):
    """The default five-solver sweep at m = 200 over both rank and sparsity levels.

    Returns ``(rows, trace_dir, config)``; traces are kept so tests can
    re-check the stopping rule and objective behaviour.
    """
    from iadmm.bench import ExperimentConfig, run_experiment

    trace_dir = tmp_path_factory.mktemp("traces")
    config = ExperimentConfig(
        orders=(200,), rank_fractions=(0.05, 0.1), sparsity_fractions=(0.05, 0.1),
        trace_dir=str(trace_dir),
    )
    return run_experiment(config), trace_dir, config
