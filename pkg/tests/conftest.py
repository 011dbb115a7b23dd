import pytest

_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """``criterion(label, ok, detail)`` records a pass/fail line and asserts ``ok``."""

    def record(label: str, ok: bool, detail: str = "") -> None:
        ok = bool(ok)
        _LINES.append((label, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
