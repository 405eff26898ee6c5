"""Shared pytest hooks."""

import sys


def pytest_terminal_summary(terminalreporter):
    # repeat the acceptance checklist outside capture so the lines are
    # visible even when every test passes
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.CHECKLIST:
        return
    terminalreporter.section("acceptance checklist")
    for line in mod.CHECKLIST:
        terminalreporter.write_line(line)
