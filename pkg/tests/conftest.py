import numpy as np
import pytest

from rankbench import kernels
from rankbench.meta_data import PerformanceMatrix
from rankbench.ranking import Ranking

ALGS = ("a1", "a2", "a3", "a4", "a5", "a6")
DATASETS = ("D1", "D2", "D3", "D4", "D5", "D6")

# Worked-example matrix for the dataset-omission illustration; None marks missing cells.
TABLE1 = {
    "a1": (0.85, None, 0.77, 0.98, None, 0.82),
    "a2": (0.95, None, 0.67, 0.68, None, 0.72),
    "a3": (0.63, None, 0.55, 0.89, None, 0.46),
    "a4": (0.45, None, 0.34, 0.58, None, 0.63),
    "a5": (0.78, None, 0.61, 0.34, None, 0.97),
    "a6": (0.67, None, 0.70, 0.89, None, 0.22),
}
# invented runtimes; a3 and a1 on D4 are used by the loss-curve example
RUNTIMES = {"a1": 50.0, "a2": 20.0, "a3": 100.0, "a4": 5.0, "a5": 300.0, "a6": 1.0}


def table1_matrix() -> PerformanceMatrix:
    acc = np.array([[np.nan if v is None else v for v in TABLE1[a]] for a in ALGS])
    rt = np.where(np.isnan(acc), np.nan, np.array([[RUNTIMES[a]] * 6 for a in ALGS]))
    return PerformanceMatrix(ALGS, DATASETS, acc, rt)


@pytest.fixture
def table1():
    return table1_matrix()


@pytest.fixture
def r1():
    return Ranking({"a1": 1, "a3": 2, "a4": 3, "a2": 4, "a6": 5, "a5": 6}, n_max=6)


@pytest.fixture
def r2():
    return Ranking({"a2": 1, "a1": 2}, n_max=6)


def _available_backends():
    names = ["python"]
    try:
        kernels.load_backend("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the package's kernel calls through each available backend."""
    mod = kernels.load_backend(request.param)
    for name in ("fold_weighted", "loss_curve", "interval_mean"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


# ---- acceptance summary: one PASS/FAIL/SKIP line per criterion ----

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        prev = _ACCEPTANCE.get(number)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
