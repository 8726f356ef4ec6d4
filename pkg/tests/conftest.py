import numpy as np
import pytest

from noma_ee import kernels
from noma_ee._accel import HAVE_NUMBA

_acceptance = {}


@pytest.fixture(params=["numpy", "numba"])
def backend(request, monkeypatch):
    """Run a test once per kernel path by flipping the dispatch flag."""
    if request.param == "numba" and not HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(kernels, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        verdict = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
