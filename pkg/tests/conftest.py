import math

import pytest

from speclab.geometry import build_polygon, regular_polygon, square

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def pi_square():
    return square(math.pi, list("DNNN"))


@pytest.fixture
def unit_triangle():
    return build_polygon([(0, 0), (1, 0), (0, 1)], "DDD")


@pytest.fixture
def l_shape():
    return build_polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], "DDDDDD")


@pytest.fixture
def pentagon():
    return regular_polygon(5, labels=list("DNNNN"))


@pytest.fixture
def trapezoid():
    return build_polygon([(-1, 0), (1, 0), (0.5, 1), (-0.5, 1)], list("NDND"))
