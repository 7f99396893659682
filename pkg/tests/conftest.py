import numpy as np
import pytest

from metaopt.streams import Stream
from metaopt.world import WorldConfig, make_task


@pytest.fixture
def circle_task():
    return make_task("circle", (0.0, 0.0, 1.5, 0.0), (0.01, 0.01, 0.01))


@pytest.fixture
def quiet_circle():
    return make_task("circle", (0.0, 0.0, 1.5, 0.0))


@pytest.fixture
def small_world():
    return WorldConfig(horizon=5)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def stream():
    return Stream(1234)


ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, passed, detail)``."""
    def record(name, passed, detail):
        ACCEPTANCE.append((name, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
