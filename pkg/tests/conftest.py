from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import reference  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if reference.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(reference.ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
