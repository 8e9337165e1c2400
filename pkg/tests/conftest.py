import numpy as np
import pytest

from interpoint.montecarlo import REFERENCE_ITERATIONS, SimulationConfig, run_simulation

TREND_PAIRS = ((150, 100), (600, 400))
TREND_SEEDS = range(10)


@pytest.fixture(scope="session")
def trend_means():
    """Mean z at the smallest and largest reference pair for ten master seeds."""
    out = {}
    for seed in TREND_SEEDS:
        res = run_simulation(SimulationConfig(pairs=TREND_PAIRS, iterations=REFERENCE_ITERATIONS, master_seed=seed))
        out[seed] = tuple(float(np.mean(r.z)) for r in res.pairs)
    return out


_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Store one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
