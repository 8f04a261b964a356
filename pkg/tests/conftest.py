import pytest

_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance line: ``report(key, ok, detail)``."""

    def _record(key, ok, detail=""):
        _ACCEPTANCE[key] = (bool(ok), detail)
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.split()[0].rstrip("abcd")), k)):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
