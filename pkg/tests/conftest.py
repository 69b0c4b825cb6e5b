"""Shared fixtures and the acceptance-criteria summary reporter.

Tests marked ``@pytest.mark.criterion(n, "label")`` contribute one PASS/FAIL
line to a dedicated section at the end of the pytest run, so the release
checklist can be read off the terminal without digging through node ids.
"""

import pytest

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, label): contributes to the acceptance summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, label = marker.args
    if report.when == "call":
        verdict = "PASS" if report.passed else "FAIL"
    elif report.failed:  # setup/teardown error
        verdict = "FAIL"
    else:
        return
    # a criterion can span several tests; any failure makes it FAIL
    previous = _CRITERIA.get(number, (label, "PASS"))[1]
    _CRITERIA[number] = (label, "FAIL" if "FAIL" in (previous, verdict) else "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {verdict} — {label}")


@pytest.fixture(scope="session")
def benchmark_result():
    """One full 100-pair benchmark run shared by the bracketing and
    diagnostics criteria (the expensive part of the suite, ~1.5 min)."""
    from jensengap import run_benchmark

    return run_benchmark(seed=19, count=100)
