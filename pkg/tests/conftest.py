import pytest

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance-criterion outcome; printed in the terminal summary."""

    def _report(name: str, ok: bool, detail: str) -> bool:
        _RESULTS.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return bool(ok)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_RESULTS, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
