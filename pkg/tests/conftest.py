import pytest

_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def report_criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=str):
            terminalreporter.write_line(lines[key])
