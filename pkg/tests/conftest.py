"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "notes": [], "failed": []})
    if report.failed:
        entry["ok"] = False
        entry["failed"].append(f"{report.nodeid.split('::')[-1]} ({report.when})")
    if report.when == "call":
        entry["notes"] += [v for k, v in report.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        tr.write_line(f"criterion {number:>2} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}")
        for note in e["notes"]:
            tr.write_line(f"    {note}")
        for name in e["failed"]:
            tr.write_line(f"    failed: {name}")
