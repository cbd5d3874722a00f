import numpy as np
import pytest

from ecgrowth.dataio import bundled_path, load_bundled, load_model
from ecgrowth.features import DEFAULT_PREDICTORS
from ecgrowth.linreg import DesignMatrix, FittedModel

# published 2002-2013 backtest: year -> (fitted %, actual %, error %)
PUBLISHED_BACKTEST = {
    2002: (11.163, 11.696, -0.477),
    2003: (11.815, 15.508, -3.197),
    2004: (14.362, 15.326, -0.836),
    2005: (15.110, 13.475, 1.441),
    2006: (15.864, 14.619, 1.086),
    2007: (15.491, 14.510, 0.857),
    2008: (9.004, 6.528, 2.324),
    2009: (7.331, 6.262, 1.005),
    2010: (12.524, 12.860, -0.298),
    2011: (11.202, 11.939, -0.657),
    2012: (4.875, 5.675, -0.756),
    2013: (5.532, 7.324, -1.669),
}

COEF_2002_2013 = (1.11904, 0.17232, 2.53056)
COEF_2004_2015 = (1.06443, 0.22177, 2.51926)


@pytest.fixture(scope="session")
def dataset():
    return load_bundled()


@pytest.fixture
def model_2002_2013():
    return FittedModel.from_coefficients(DEFAULT_PREDICTORS, COEF_2002_2013)


@pytest.fixture
def model_2004_2015():
    return FittedModel.from_coefficients(DEFAULT_PREDICTORS, COEF_2004_2015)


@pytest.fixture
def reference_model_path():
    return bundled_path("reference_2002_2013.json")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_design(X, y, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))
    return DesignMatrix(tuple(range(2000, 2000 + len(y))), tuple(names), X, np.asarray(y, dtype=float))


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, ok, detail in sorted(results):
        terminalreporter.write_line(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {label}: {detail}")
