import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# fixed example streams keep the suite reproducible run to run
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

ACCEPTANCE: list[str] = []


def record(name: str, ok: bool, detail: str) -> bool:
    """Print and keep one acceptance line; returns ``ok`` for the caller to assert."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    ACCEPTANCE.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
