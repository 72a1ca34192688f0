"""Shared fixtures plus a terminal summary for the acceptance suite.

Tests marked @pytest.mark.criterion(n, title) each verify one pipeline
acceptance criterion; the summary prints one PASS/FAIL line per criterion
so a run's verdict is readable at a glance.
"""

import numpy as np
import pytest

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): pipeline acceptance criterion"
    )
    config.addinivalue_line("markers", "slow: long-running end-to-end test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call":
        _RESULTS[number] = (title, report.outcome)
    elif report.when == "setup" and report.outcome != "passed":
        _RESULTS[number] = (title, report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, outcome = _RESULTS[number]
        status = {"passed": "PASS", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
