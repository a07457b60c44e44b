import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        entry = _CRITERIA.setdefault(number, {"title": title, "status": [], "detail": []})
        entry["status"].append("PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL")
        detail = dict(item.user_properties).get("detail")
        if detail:
            entry["detail"].append(str(detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        st = e["status"]
        status = "FAIL" if "FAIL" in st else "SKIP" if all(s == "SKIP" for s in st) else "PASS"
        detail = "; ".join(e["detail"])
        terminalreporter.write_line(f"criterion {number:>2} {status}  {e['title']}" + (f"  [{detail}]" if detail else ""))
