"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import OrderedDict

_labels = {}
_criteria = {}
_outcomes = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion covered by the test")


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, label = mark.args
        _labels[number] = label
        _criteria[item.nodeid] = number
    for number in sorted(_labels):
        _outcomes[number] = []


def pytest_runtest_logreport(report):
    number = _criteria.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or report.failed:
        _outcomes[number].append(report.passed and not report.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, results in _outcomes.items():
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {_labels[number]}")
