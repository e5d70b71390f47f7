import functools

import pytest

from rimmflow import Params, solve_steady


@functools.lru_cache(maxsize=None)
def steady_at(b, eps1=0.0, eps2=0.0, n_max=32):
    return solve_steady(Params(b, eps1, eps2), n_max=n_max)


@pytest.fixture(scope="session")
def steady():
    return steady_at
