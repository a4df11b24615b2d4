"""Shared pytest wiring: the acceptance scoreboard printed after each run.

tests/test_acceptance.py records one line per numbered acceptance criterion
through the ``record_criterion`` fixture; the hook below prints the collected
lines as a final block, so every full run ends with an explicit PASS/FAIL
line per criterion (including criteria whose test then fails its assert).
"""

from __future__ import annotations

import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, tolerance: str) -> bool:
        status = "PASS" if passed else "FAIL"
        _LINES[number] = f"{status}  criterion {number:2d}: {title}  [{tolerance}]"
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
