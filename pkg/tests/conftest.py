import pytest

_LINES: list[str] = []


@pytest.fixture
def report(capsys):
    """Print one acceptance line immediately and again in the terminal summary."""

    def emit(n: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
