import numpy as np
import pytest

from resflow import build_eigensystem, build_grid, interval, mode_count_below, rectangle


@pytest.fixture(scope="session")
def line():
    eig = build_eigensystem(interval(np.pi), 32)
    return eig, build_grid(eig.domain, eig)


@pytest.fixture(scope="session")
def line4():
    eig = build_eigensystem(interval(np.pi), 4)
    return eig, build_grid(eig.domain, eig)


@pytest.fixture(scope="session")
def square():
    dom = rectangle(np.pi, np.pi)
    eig = build_eigensystem(dom, mode_count_below(dom, 20))
    return eig, build_grid(dom, eig)
