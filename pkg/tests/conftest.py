import os
import time

import pytest

from bimodal_cavity.presets import figure_preset
from bimodal_cavity.sweep import clear_cache, run_sweep

QUICK_GRID_2D = 21
FULL_GRID_2D = 61

_START = time.monotonic()
_REPORT: list[str] = []


def pytest_addoption(parser):
    parser.addoption(
        "--full-grids",
        action="store_true",
        default=False,
        help="run the g-kappa presets on 61 x 61 grids instead of the quick 21 x 21",
    )


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
        terminalreporter.write_line(f"session wall time {time.monotonic() - _START:.1f} s")


@pytest.fixture(scope="session")
def report():
    """Record one human-readable PASS/FAIL line, echoed in the terminal summary."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        _REPORT.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def session_start():
    return _START


@pytest.fixture(scope="session")
def grid_2d(request):
    return FULL_GRID_2D if request.config.getoption("--full-grids") else QUICK_GRID_2D


_RUNS: dict = {}


def _timed_run(name, grid_2d, workers):
    t0 = time.perf_counter()
    result = run_sweep(figure_preset(name, grid_2d=grid_2d), workers=workers)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def workers():
    return os.cpu_count() or 1


@pytest.fixture(scope="session")
def quick_fig2(workers):
    """Both g-kappa single/bimodal maps at 21 x 21, timed from an empty memo."""
    clear_cache()
    for name in ("fig2a", "fig2b"):
        if (name, QUICK_GRID_2D) not in _RUNS:
            _RUNS[(name, QUICK_GRID_2D)] = _timed_run(name, QUICK_GRID_2D, workers)
    return {name: _RUNS[(name, QUICK_GRID_2D)] for name in ("fig2a", "fig2b")}


@pytest.fixture(scope="session")
def preset_run(grid_2d, workers):
    """Run figure presets lazily, once per session; returns (result, seconds)."""

    def run(name):
        key = (name, grid_2d)
        if key not in _RUNS:
            _RUNS[key] = _timed_run(name, grid_2d, workers)
        return _RUNS[key]

    return run
