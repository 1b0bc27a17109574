import numpy as np
import pytest
from hypothesis import settings

from fedgauss.datasets import load_collapse, load_mixed_shapes
from fedgauss.smc import FieldConfig

settings.register_profile("package", deadline=None, max_examples=60)
settings.load_profile("package")


@pytest.fixture(scope="session")
def corpus():
    return load_mixed_shapes()


@pytest.fixture(scope="session")
def collapse_feature():
    return load_collapse()


@pytest.fixture(scope="session")
def cfg_small():
    # small field: quick faithful-mode arithmetic in unit tests
    return FieldConfig.create(l=16, f=6, K=3, kappa=20)


@pytest.fixture(scope="session")
def cfg_desk():
    # the default desk-scale protocol configuration
    return FieldConfig.create(l=100, f=50, K=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


# ---------------------------------------------------------------------------
# acceptance summary: one visible line per criterion at the end of the run

_CRITERIA = {}


def register_criterion(num: int, passed: bool, detail: str):
    _CRITERIA[num] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        passed, detail = _CRITERIA[num]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {word} - {detail}")
