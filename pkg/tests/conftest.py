import numpy as np
import pytest

from hrs_mimo.rate_mc import draw_precoders
from hrs_mimo.scenario import one_ring_scenario


@pytest.fixture(scope="session")
def small_disjoint():
    # 2 groups x 2 users on a 24-element UCA; each group has rank 9
    return one_ring_scenario(24, 2, 2, 4, 8, 0.4, np.pi / 8)


@pytest.fixture(scope="session")
def small_overlapping():
    return one_ring_scenario(24, 2, 3, 4, 6, 0.4, np.pi / 3)


@pytest.fixture(scope="session")
def small_draw(small_disjoint):
    return draw_precoders(small_disjoint, 0, 11, 100.0)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion_log():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def log(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
