import functools

import pytest
from hypothesis import settings

from wavejunction import BCPair, Parity, QuadrantProblem, solve_full, solve_quadrant, validate_geometry

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

WIDE = validate_geometry(3, 3, 5, 5)
SQUARE2 = validate_geometry(2, 2, 2, 2)
SKEW = validate_geometry(2, 3, 5, 4)
OFFSET = validate_geometry(2, 2, 4, 3)


@functools.lru_cache(maxsize=None)
def quadrant(g, k, bc, p=0, N=100):
    return solve_quadrant(QuadrantProblem(g, k, bc, p, N))


@functools.lru_cache(maxsize=None)
def full(g, k, parity, p=0, N=100):
    return solve_full(g, k, parity, p, N)


@pytest.fixture(scope="session")
def wide_solutions():
    return {bc: quadrant(WIDE, 5.0, bc) for bc in BCPair}


@pytest.fixture(scope="session")
def wide_full():
    return {par: full(WIDE, 5.0, par) for par in Parity}
