import pytest

from budgetdyn import ModelParams


@pytest.fixture
def surplus_params():
    """a = 1/8 with the surplus fixed point at 10 (gamma = 12.5)."""
    return ModelParams(a=0.125, c0=1.0, y0=13.5)


@pytest.fixture
def anchor_deficit():
    """a = 1/8, b_N = 10, so gamma = -12.5."""
    return ModelParams(a=0.125, c0=12.5, y0=0.0)


# --- acceptance summary: one PASS/FAIL line per criterion -------------------------

_labels = {}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _labels[item.nodeid] = marker.args


def pytest_runtest_logreport(report):
    if report.nodeid in _labels and (report.when == "call" or report.failed):
        _outcomes[report.nodeid] = _outcomes.get(report.nodeid, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    summary = {}
    for nodeid, ok in _outcomes.items():
        number, text = _labels[nodeid]
        _, prev = summary.get(number, (text, True))
        summary[number] = (text, prev and ok)
    terminalreporter.section("acceptance criteria")
    for number in sorted(summary):
        text, ok = summary[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {text}")
