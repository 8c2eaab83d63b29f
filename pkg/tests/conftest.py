import pytest

_acceptance_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if "test_acceptance" in str(item.fspath):
        if rep.when == "call":
            _acceptance_results[item.name] = rep.passed
        elif rep.when == "setup" and rep.failed:
            _acceptance_results[item.name] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_acceptance_results):
        status = "PASS" if _acceptance_results[name] else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
