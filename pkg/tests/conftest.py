import time

import pytest

_ACCEPTANCE: dict[str, tuple[str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.user_properties.append(("runtime", time.perf_counter() - start))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call" or item.get_closest_marker("acceptance") is None:
        return
    runtime = dict(item.user_properties).get("runtime", 0.0)
    label = item.get_closest_marker("acceptance").args[0]
    _ACCEPTANCE[label] = ("PASS" if rep.passed else "FAIL", runtime)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        status, runtime = _ACCEPTANCE[label]
        terminalreporter.write_line(f"{status}  {label}  ({runtime:.1f} s)")
