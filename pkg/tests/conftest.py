"""Shared pytest plumbing.

The acceptance tests in ``test_acceptance.py`` record a one-line verdict per
criterion via :func:`record_criterion`; the hook below prints the collected
lines in the terminal summary so they are visible even when output capture is
on.
"""

_CRITERION_LINES = []


def record_criterion(name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"{status}  {name}"
    if detail:
        line += f"  [{detail}]"
    _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERION_LINES:
        terminalreporter.write_line(line)
