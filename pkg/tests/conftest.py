"""Per-criterion PASS/FAIL summary for the acceptance tests."""

from collections import OrderedDict

_RESULTS = OrderedDict()
_TITLES = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            cid, title = mark.args
            _TITLES[cid] = title
            _RESULTS.setdefault(cid, [])
            item.user_properties.append(("criterion", cid))


def pytest_runtest_logreport(report):
    cid = dict(report.user_properties).get("criterion")
    if cid is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        _RESULTS[cid].append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c[1:])):
        outcomes = _RESULTS[cid]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for _, o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        failed = [name for name, o in outcomes if o != "passed"]
        extra = f"  ({', '.join(failed)})" if failed and status == "FAIL" else ""
        terminalreporter.write_line(f"{cid:<4}{status:<8}{_TITLES[cid]}{extra}")
