import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("desk", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("desk")


@pytest.fixture
def rng():
    return random.Random(12345)


def rand_unit_fraction(rng: random.Random, p: int, size: int = 10 ** 6) -> Fraction:
    """A random rational whose denominator is prime to p."""
    while True:
        d = rng.randrange(1, 50)
        if d % p:
            return Fraction(rng.randrange(-size, size), d)


_CRITERIA: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None or (rep.when != "call" and rep.passed):
        return
    num, title = m.args
    _, prev = _CRITERIA.get(num, (title, True))
    _CRITERIA[num] = (title, prev and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  AC{num:02d}  {title}")
