import acceptance_registry


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_registry.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_registry.RESULTS:
        terminalreporter.write_line(line)
