import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multicover.generators import GeneratorSpec, generate, to_cloud
from multicover.geometry import PointCloud, check_general_position

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TRIANGLE = [(0, 0), (2, 0), (0, 2)]
LINE5 = [0, 1, 2, 3, 4]


def random_cloud(n: int, d: int, seed: int) -> PointCloud:
    """Seeded uniform cloud in [0,1]^d, redrawn until generic."""
    rng = np.random.default_rng(seed)
    while True:
        c = to_cloud(rng.uniform(0, 1, (n, d)))
        if check_general_position(c).ok:
            return c


def small_clouds():
    """The d=2 test clouds shared by the cross-model checks."""
    return [generate(GeneratorSpec("uniform-square", n, seed=s)) for s, n in enumerate((5, 6, 7, 8, 8))]


@pytest.fixture
def triangle():
    return PointCloud.from_points(TRIANGLE)


@pytest.fixture
def line5():
    return PointCloud.from_points(LINE5)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    n, title = m.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        _criteria[n] = (status, title, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, title, dur = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}  ({dur:.1f}s)")
