import numpy as np
import pytest

from saddlescar import potentials as P


@pytest.fixture
def unit_saddle_frame():
    """sigma = (1, -1), unit masses, hbar = 1."""
    pot = P.QuadraticSaddle((1.0, -1.0))
    cp = P.find_critical_point(pot, [0.2, -0.1])
    return P.saddle_frame(cp, [1.0, 1.0], 1.0, potential=pot)


@pytest.fixture
def confined_saddle():
    pot = P.QuadraticSaddle((1.0, -2.0), quartic=(0.0, 0.02))
    cp = P.find_critical_point(pot, np.zeros(2))
    return pot, P.saddle_frame(cp, [1.0, 1.0], 1.0, potential=pot)


@pytest.fixture
def mathieu_frame():
    pot = P.CosinePotential(50.0)
    cp = P.find_critical_point(pot, [0.3])
    return pot, P.saddle_frame(cp, [0.5], 1.0, potential=pot, allow_transverse_only=True)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
