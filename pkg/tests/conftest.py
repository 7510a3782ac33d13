import pytest

_RESULTS: dict[int, tuple[str, str]] = {}


class Recorder:
    """Collects one verdict per acceptance criterion for the summary block."""

    def __call__(self, number: int, ok: bool, detail: str, warn_only: bool = False) -> bool:
        verdict = "PASS" if ok else ("WARN" if warn_only else "FAIL")
        _RESULTS[number] = (verdict, detail)
        return ok


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        verdict, detail = _RESULTS[number]
        terminalreporter.write_line(f"[{verdict}] criterion {number:>2}: {detail}")
