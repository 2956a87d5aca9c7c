import numpy as np
import pytest

from approxfix.seminorms import build_admissible, coordinate_functionals
from approxfix.sets import ConvexBody


@pytest.fixture
def square():
    return ConvexBody.box([-1, -1], [1, 1])


@pytest.fixture
def square_rho(square):
    return build_admissible(coordinate_functionals(2), square)


@pytest.fixture
def segment():
    return ConvexBody([[0.0], [1.0]])


def quarter_turn(x):
    return np.array([-x[1], x[0]])


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
