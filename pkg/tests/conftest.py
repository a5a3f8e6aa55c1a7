from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    rows = getattr(mod, "RESULTS", None)
    if rows:
        terminalreporter.section("acceptance criteria")
        for line in sorted(rows):
            terminalreporter.write_line(line)
