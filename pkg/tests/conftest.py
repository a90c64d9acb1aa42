import pytest

_VERDICTS: list[tuple[int, bool, str]] = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the test still asserts on its own."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _VERDICTS.append((number, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_VERDICTS, key=lambda v: v[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
