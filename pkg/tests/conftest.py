import numpy as np
import pytest

from quadsplat.geometry import Conic2D, Cov2D, invert_cov

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


@pytest.fixture
def tilted_conic() -> Conic2D:
    # Sigma = [[2, 1], [1, 2]]  ->  Lambda = [[2/3, -1/3], [-1/3, 2/3]]
    return invert_cov(Cov2D(2.0, 1.0, 2.0)).with_gamma(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
