"""Echo the acceptance verdicts at the end of every pytest run."""

from __future__ import annotations

import support


def pytest_terminal_summary(terminalreporter):
    if not support.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(support.ACCEPTANCE):
        terminalreporter.write_line(support.ACCEPTANCE[n])
