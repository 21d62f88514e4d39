import pytest

RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[RESULTS] = {}


@pytest.fixture
def verdict(request):
    """Record one acceptance line: verdict(number, title, ok, detail)."""
    results = request.config.stash[RESULTS]

    def record(number, title, ok, detail=""):
        results[number] = (title, bool(ok), detail)
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args or report.when != "call" or not report.failed:
        return
    results = item.config.stash[RESULTS]
    number, title = marker.args[0], marker.args[1]
    if number not in results:
        results[number] = (title, False, f"errored: {call.excinfo.typename}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
