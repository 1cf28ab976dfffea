"""Shared test fixtures and the acceptance-criteria summary.

After a run that included tests/test_acceptance.py, one PASS/FAIL line
per acceptance criterion is printed at the end of the pytest output.
"""

from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid or "::test_criterion_" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            # a test that errored in setup may also appear as failed; keep the worst
            if outcomes.get(name) != "failed":
                outcomes[name] = "failed" if status in ("failed", "error") else status
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(outcomes):
        verdict = "PASS" if outcomes[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
