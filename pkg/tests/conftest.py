"""Shared fixtures plus the acceptance-line reporter.

test_acceptance.py records one line per criterion through ``record`` before
asserting, so the terminal summary shows every criterion's outcome even when
one of them fails.
"""

import numpy as np
import pytest

_ACCEPTANCE_LINES: list[str] = []


def record(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
