"""Shared pytest plumbing: the acceptance tests register one pass/fail line
per criterion and the lines are echoed after the run summary, outside
pytest's output capture."""

CRITERION_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    CRITERION_LINES.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
