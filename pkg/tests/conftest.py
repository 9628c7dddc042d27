import json
from functools import lru_cache
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for n in getattr(report, "criteria", ()):
        ok = report.outcome == "passed"
        _criteria[n] = _criteria.get(n, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _criteria[n] else 'FAIL'}")


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text())


@lru_cache(maxsize=None)
def run_case(case_id):
    from roughwall.bench import default_case, run_experiment

    return run_experiment(default_case(case_id), keep_solutions=True)


@pytest.fixture(scope="session")
def experiment():
    return run_case
