import pytest

_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Print one PASS/FAIL line for an acceptance criterion and keep it for the summary."""

    def emit(number: int, title: str, ok: bool, detail: str, seconds: float):
        line = f"[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail} ({seconds:.2f}s)"
        print(line)
        _LINES.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
