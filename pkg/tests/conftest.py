import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collect acceptance lines for the terminal summary."""
    def record(result):
        ACCEPTANCE_LINES.append((result.number, result.line()))
        print(result.line())
        return result
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
