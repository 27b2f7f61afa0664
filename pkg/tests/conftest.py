import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

_LINES = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the run summary."""

    def record(number: int, ok: bool, detail: str):
        _LINES.setdefault(number, []).append((ok, detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        parts = _LINES[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d if p else f"[fails] {d}" for p, d in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
