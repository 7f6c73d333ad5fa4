import pytest

from pirmetrics import JudgmentSet, RankedList


def make_list(grades, query_id="q1", list_id="A", prefix="d"):
    docs = [f"{prefix}{i}" for i in range(len(grades))]
    judgments = JudgmentSet({(query_id, d): g for d, g in zip(docs, grades)})
    return RankedList(query_id, list_id, docs), judgments


@pytest.fixture
def graded_list():
    return make_list([1.0, 0.6, 0.8])


_criteria: list[tuple[int, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _criteria.append((number, title, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_criteria):
        terminalreporter.write_line(f"[{status}] AC{number:>2} {title}")
