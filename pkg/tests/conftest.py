import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        print(_LINES[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
