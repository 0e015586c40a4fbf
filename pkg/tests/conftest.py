import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            num, title = mark.args
            _CRITERIA.setdefault(num, {"title": title, "outcomes": []})
            item.user_properties.append(("criterion", num))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            _CRITERIA[value]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    ran = {num: entry for num, entry in _CRITERIA.items() if entry["outcomes"]}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        entry = ran[num]
        outcomes = entry["outcomes"]
        if all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {entry['title']}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(42)
