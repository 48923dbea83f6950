import pytest

CRITERIA_LINES = []


def report(line):
    """Print a criterion verdict now and repeat it in the terminal summary."""
    print(line)
    CRITERIA_LINES.append(line)


@pytest.fixture
def criterion_report():
    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
