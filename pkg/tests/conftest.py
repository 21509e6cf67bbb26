import numpy as np
import pytest

_REPORT = []


@pytest.fixture
def report():
    """Record one acceptance line; the assertion is still made by the test."""

    def _record(name, passed, detail=""):
        _REPORT.append((name, bool(passed), detail))
        return passed

    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _REPORT:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
