import pytest

_CRITERIA: dict = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Record ``(passed, detail)`` per acceptance criterion for the summary."""

    def record(name, passed, detail=""):
        _CRITERIA[name] = (bool(passed), detail)
        line = f"{name}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: (len(s), s)):
        passed, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}")
