"""Shared pytest plumbing for the suite.

The acceptance tests record a one-line verdict per criterion; those lines
are echoed in the terminal summary so a full run ends with a compact
pass/fail scoreboard even when per-test output is captured.
"""

RESULTS: list[str] = []


def record(line: str) -> None:
    RESULTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
