import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dirac_ab import RadialGrid, select_extension

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALPHAS = (0.25, 0.5, 0.75)


@pytest.fixture(scope="session")
def grid():
    return RadialGrid.graded()


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid.graded(r_max=30.0)


@pytest.fixture(params=ALPHAS, ids=lambda a: f"alpha={a}")
def cfg(request):
    return select_extension(request.param)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion; returns the flag."""
    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
