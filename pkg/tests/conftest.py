import pytest
from hypothesis import HealthCheck, settings

from rayflow.angles import ExactAngle
from rayflow.motion.context import cached_context

settings.register_profile("rayflow", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rayflow")


@pytest.fixture(scope="session")
def ctx_half():
    return cached_context(ExactAngle(1, 2))


@pytest.fixture(scope="session")
def ctx_sixth():
    return cached_context(ExactAngle(1, 6))


@pytest.fixture(scope="session")
def ctx_956():
    return cached_context(ExactAngle(9, 56))


# one summary line per acceptance criterion: a criterion passes when all of its tests pass
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    entry["ok"] &= rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if e['ok'] else 'FAIL'}  {e['title']} ({e['tests']} tests)")
