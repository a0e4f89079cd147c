import _support


def pytest_terminal_summary(terminalreporter):
    if not _support.CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in _support.CRITERIA:
        terminalreporter.write_line(line)
