"""Prints one PASS/FAIL line per acceptance criterion at the end of the session."""

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("criterion")
        if detail:
            _results[report.nodeid] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for status, detail in sorted(_results.values(), key=lambda r: r[1]):
        terminalreporter.write_line(f"{status}  {detail}")
