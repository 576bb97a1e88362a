import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = []


@pytest.fixture
def criterion():
    """Record one acceptance-criterion verdict for the end-of-run summary."""

    def record(name: str, passed: bool, detail: str = ""):
        _criteria.append((name, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
