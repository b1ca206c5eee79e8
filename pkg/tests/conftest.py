"""Shared pytest hooks: print the acceptance criterion summary at the end."""

CRITERION_LINES = []


def record_criterion(number, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:2d}: {status}  {detail}".rstrip()
    CRITERION_LINES.append((number, line))
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
