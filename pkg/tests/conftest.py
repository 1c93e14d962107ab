import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_RESULTS] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    detail = dict(report.user_properties).get("detail", "")
    item.config.stash[_RESULTS].append((number, title, report.outcome, report.duration, detail))


def pytest_terminal_summary(terminalreporter, config):
    results = sorted(config.stash[_RESULTS])
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, outcome, duration, detail in results:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{verdict}] {number:>2}. {title} ({duration:.1f}s)"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)
