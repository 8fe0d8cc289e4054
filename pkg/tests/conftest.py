import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Append a line to the acceptance summary printed at the end of the session."""
    return _LINES.append


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
