import pytest


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("VRESIDUE_CACHE_DIR", str(tmp_path / "cache"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion(capsys):
    """Record one acceptance line; it is echoed now and again in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str, seconds: float):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({seconds:.1f} s) {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return record
