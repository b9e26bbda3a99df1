"""One PASS/FAIL line per acceptance criterion in the terminal summary."""

import re

_ACCEPTANCE = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.fspath.basename == "test_acceptance.py":
            doc = (item.function.__doc__ or "").strip().splitlines()
            _ACCEPTANCE[item.nodeid] = {"doc": doc[0] if doc else item.name, "outcome": "NOT RUN", "secs": 0.0}


def pytest_runtest_logreport(report):
    rec = _ACCEPTANCE.get(report.nodeid)
    if rec is None:
        return
    if report.when == "call":
        rec["outcome"] = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        rec["secs"] = report.duration
    elif report.failed:
        rec["outcome"] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rec in _ACCEPTANCE.items():
        m = re.search(r"criterion_(\d+)", nodeid)
        param = re.search(r"\[(.*)\]$", nodeid)
        label = f"criterion {int(m.group(1))}" if m else nodeid
        if param:
            label += f" [{param.group(1)}]"
        terminalreporter.write_line(f"{rec['outcome']:4}  {label}: {rec['doc']}  ({rec['secs']:.2f}s)")
