import pytest

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    label = mark.args[0]
    failed = report.failed or (report.when == "setup" and report.skipped)
    if report.when == "call" or failed:
        prev = _CRITERIA.get(label, "PASS")
        _CRITERIA[label] = "FAIL" if failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in _CRITERIA:
        terminalreporter.write_line(f"{_CRITERIA[label]}  {label}")
