import math

import numpy as np
import pytest

from rollframe import TimeGrid, fundamental_solution, make_chart, make_curve, standard_pairs

STEPS = 2048

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def pairs():
    return standard_pairs()


@pytest.fixture(scope="session")
def solutions(pairs):
    out = {}
    for name, (entry, curve) in pairs.items():
        out[name] = fundamental_solution(entry.chart, curve, TimeGrid(curve.t_min, curve.t_max, STEPS))
    return out


@pytest.fixture(scope="session")
def sphere():
    return make_chart("sphere")


@pytest.fixture(scope="session")
def plane():
    return make_chart("plane")


@pytest.fixture(scope="session")
def latitude(sphere):
    return make_curve(sphere, "latitude", {"colatitude": math.pi / 3})


@pytest.fixture(scope="session")
def equator(sphere):
    return make_curve(sphere, "great_circle")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion outcome for the terminal summary."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
