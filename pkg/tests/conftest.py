import numpy as np
import pytest

from doublephase.cylinder import Cylinder
from doublephase.grid import GridField

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def unit_slab():
    return Cylinder((0.0,), 1.0, 0.0, 1.0)


@pytest.fixture
def square_slab():
    return Cylinder((0.0, 0.0), 1.0, 0.0, 1.0)


def make_field(func, domain, nx, nt):
    return GridField.from_function(func, domain, nx, nt)


@pytest.fixture
def field_factory():
    return make_field


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
