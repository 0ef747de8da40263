"""Shared pytest wiring for the acceptance gate.

Criterion verdict lines are collected here and echoed in a terminal
summary section, so they reach the real output stream even when
pytest's capture owns the file descriptors during the tests.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
