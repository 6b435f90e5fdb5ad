import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    # a criterion passes only if each of its tests passes
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and not hasattr(rep, "wasxfail")
        prev = _RESULTS.get(n, (True, []))
        _RESULTS[n] = (prev[0] and ok, prev[1] + [(item.name, ok, getattr(rep, "wasxfail", ""))])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, parts = _RESULTS[n]
        bad = [name + (" (expected failure)" if why else "") for name, good, why in parts if not good]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}" + (f"  [{', '.join(bad)}]" if bad else ""))
