import math

import numpy as np
import pytest

from ibregion.gaussian import GaussianPair, ib_grid_source
from ibregion.ib_solver import ib_curve
from ibregion.probability import JointPMF

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def bsc(p=0.1):
    return JointPMF(("Y", "X"), np.array([[0.5 * (1 - p), 0.5 * p], [0.5 * p, 0.5 * (1 - p)]]))


def random_joint(rng, sizes, names=None, sparse=0.0):
    t = rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes)
    if sparse:
        t = np.where(rng.random(sizes) < sparse, 0.0, t)
        if t.sum() == 0:
            t.flat[0] = 1.0
    names = names or tuple("ABCDEFG"[: len(sizes)])
    return JointPMF.normalized(names, t)


@pytest.fixture(scope="session")
def bsc_source():
    return bsc(0.1)


@pytest.fixture(scope="session")
def bsc_curve(bsc_source):
    return ib_curve(bsc_source, u_size=2)


@pytest.fixture(scope="session")
def gaussian_grid():
    return ib_grid_source(GaussianPair(0.9))


@pytest.fixture
def record():
    """Register one acceptance line: record(name, passed, detail)."""

    def add(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")

    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    bad = sum(not ok for _, ok, _ in _ACCEPTANCE)
    terminalreporter.write_line(f"{len(_ACCEPTANCE) - bad}/{len(_ACCEPTANCE)} criteria passed")


LN2 = math.log(2)
