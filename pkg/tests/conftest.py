import pytest

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Record one acceptance line: ``record(number, title, passed, detail)``."""
    def add(number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title}"
        if detail:
            line += f" | {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(line)
