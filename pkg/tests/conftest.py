"""Collects acceptance verdict lines and prints them after the run."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Call with (criterion, passed, detail); the line is printed at once and in the summary."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with request.config.pluginmanager.getplugin("capturemanager").global_and_fixture_disabled():
            print(f"\n{line}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
