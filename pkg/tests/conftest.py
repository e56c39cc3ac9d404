import numpy as np
import pytest

from okubo.canonical import ExponentChart

PTS3 = (-0.4, 1.3, 2.5)
PTS2 = (-0.4, 1.3)

ACCEPTANCE_LINES = {}


def points_for(chart):
    return PTS2 if chart.type_tag == "IV" else PTS3


def chart_III3():
    return ExponentChart("III*", 1, (-0.26392 + 0.544174j,), (-0.323597 + 0.525012j,),
                         (0.386296 - 0.318452j,), (0.329385 + 0.192057j, 0)).close_fuchs()


def chart_II4():
    return ExponentChart("II*", 2, (-0.072593 + 0.229809j, -0.286881 - 0.537691j),
                         (0.333961 - 0.127122j,), (0.381033 + 0.297463j,),
                         (-0.590524 + 0.232188j, 0)).close_fuchs()


def chart_III5():
    return ExponentChart("III*", 2, (-0.411804 - 0.387751j, 0.521429 - 0.01607j),
                         (0.03783 - 0.778391j, -0.542542 + 0.008787j), (0.129769 - 0.56738j,),
                         (-0.124526 - 0.499873j, 0)).close_fuchs()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
