import pytest

_ACCEPTANCE = {}


def record_acceptance(number, title, ok, detail):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    _ACCEPTANCE[number] = line
    print(line)
    return line


@pytest.fixture
def acceptance():
    def _record(number, title, ok, detail):
        line = record_acceptance(number, title, ok, detail)
        assert ok, line
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
