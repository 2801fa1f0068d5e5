import numpy as np
import pytest

from qgafkit.cnn import kernels

THREE_ROWS = "date,close\n2020-01-01,100\n2020-01-02,105\n2020-01-03,84\n"


@pytest.fixture
def three_row_csv(tmp_path):
    path = tmp_path / "prices.csv"
    path.write_text(THREE_ROWS)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "native"])
def backend(request):
    if request.param == "native" and kernels.native is None:
        pytest.skip("native extension not built")
    previous = kernels.BACKEND
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
