import pytest

_VERDICTS = []


class Criterion:
    """Records one acceptance verdict; the line is printed in the session summary."""

    def __call__(self, number, ok, detail):
        _VERDICTS.append((number, bool(ok), detail))
        return ok


@pytest.fixture
def criterion():
    return Criterion()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    def order(v):
        text = str(v[0])
        digits = "".join(ch for ch in text if ch.isdigit())
        return int(digits), text

    for number, ok, detail in sorted(_VERDICTS, key=order):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
