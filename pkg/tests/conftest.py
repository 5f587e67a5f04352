import math

import pytest

from slspec.wkb import CoupledBC, SeparatedBC, SLProblem

EXAMPLE_P = "2 + sin(2*pi*x)"
EXAMPLE_V = "cos(2*pi*x)"


@pytest.fixture
def free():
    return SLProblem("1", "0")


@pytest.fixture
def example():
    return SLProblem(EXAMPLE_P, EXAMPLE_V)


def massive(m):
    return SLProblem("1", repr(float(m * m)))


def bc_families():
    """One representative of each boundary-condition family used across the tests."""
    return {
        "dirichlet": SeparatedBC.dirichlet(),
        "robin": SeparatedBC(1.0, 0.5, 2.0, 1.0),
        "mixed": SeparatedBC(0.0, 1.0, 1.0, 0.0),
        "coupled": CoupledBC(0.3, 1.0, 0.0, 0.0, 1.0),
        "coupled_k12": CoupledBC(-0.7, 1.2, 0.4, 0.3, 1.0 / 1.2 + 0.3 * 0.4 / 1.2),
    }


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def pi():
    return math.pi


def random_problem(rng):
    """A smooth positive ``p`` and a smooth ``V`` with random coefficients."""
    a = rng.uniform(1.5, 3.0)
    b = rng.uniform(-1.0, 1.0)
    k = rng.integers(1, 3)
    ph = rng.uniform(0, 2 * math.pi)
    c = rng.uniform(-0.4, 0.4)
    p = f"{a!r} + {b!r}*sin({2 * k}*pi*x + {ph!r}) + {c!r}*x"
    v0, v1, v2 = rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
    V = f"{v0!r} + {v1!r}*cos(2*pi*x) + {v2!r}*exp(x)"
    return SLProblem(p, V)


def random_separated(rng, robin=True):
    if robin:
        return SeparatedBC(rng.uniform(0.1, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.5, 2.0))
    return SeparatedBC(1.0, 0.0, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))


def random_coupled(rng, k12_zero=False, positive=False):
    """Random coupled data with det K = 1.

    With ``positive=True`` and ``k12 != 0`` the boundary form
    ``(k11 y0^2 - 2 y0 y1 + k22 y1^2) / |k12|`` is positive semidefinite
    (``k12 < 0`` and ``k21 <= 0``), so a positive potential keeps the
    spectrum positive.
    """
    k11 = rng.uniform(0.5, 2.0)
    if positive:
        k12 = 0.0 if k12_zero else -rng.uniform(0.2, 1.5)
        k21 = -rng.uniform(0.2, 1.0)
    else:
        k12 = 0.0 if k12_zero else rng.uniform(0.2, 1.5)
        k21 = rng.uniform(-1.0, 1.0)
    k22 = (1.0 + k12 * k21) / k11
    return CoupledBC(rng.uniform(-2.5, 2.5), k11, k12, k21, k22)
