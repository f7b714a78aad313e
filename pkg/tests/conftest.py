import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE_LINES[name] = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (len(k.split()[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
