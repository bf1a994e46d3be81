from __future__ import annotations

import pytest

RESULTS: dict = {}


@pytest.fixture
def record():
    """Store one pass/fail line per acceptance criterion for the summary."""
    def _record(criterion: int, passed: bool, detail: str) -> None:
        line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        RESULTS[criterion] = line
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
