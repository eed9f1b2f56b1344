import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the per-property acceptance lines past the output capture."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance")
    if mod is not None and getattr(mod, "RESULT_LINES", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULT_LINES:
            terminalreporter.write_line(line)
