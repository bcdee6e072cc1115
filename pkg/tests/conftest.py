import pytest

_criteria_lines = []


@pytest.fixture
def report():
    """Record one acceptance line; printed again in the terminal summary."""
    def _report(criterion, passed, detail=""):
        line = f"[criterion {criterion:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _criteria_lines.append(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if _criteria_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criteria_lines:
            terminalreporter.write_line(line)
