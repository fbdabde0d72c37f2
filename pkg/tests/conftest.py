import pytest

from tthammer import corpus

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""
    def add(number: int, passed: bool | None, detail: str) -> None:
        verdict = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"criterion {number}: {verdict} ({detail})"
        _LINES.append(line)
        print(line)
    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def env():
    return corpus.load_bundled()
