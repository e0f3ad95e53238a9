import functools

import numpy as np
import pytest

from schemeq.groups import cyclic, named_group, quaternion, symmetric
from schemeq.scheme import (
    build_conjugacy_scheme,
    build_grassmann,
    build_group_scheme,
    build_johnson,
)


@functools.lru_cache(maxsize=None)
def scheme(name: str):
    builders = {
        "C5": lambda: build_group_scheme(cyclic(5)),
        "C3": lambda: build_group_scheme(cyclic(3)),
        "S3": lambda: build_group_scheme(symmetric(3)),
        "S3c": lambda: build_conjugacy_scheme(symmetric(3)),
        "S4c": lambda: build_conjugacy_scheme(symmetric(4)),
        "Q8c": lambda: build_conjugacy_scheme(quaternion()),
        "D4c": lambda: build_conjugacy_scheme(named_group("D4")),
        "J42": lambda: build_johnson(4, 2),
        "J52": lambda: build_johnson(5, 2),
        "J63": lambda: build_johnson(6, 3),
        "G242": lambda: build_grassmann(2, 4, 2),
        "G331": lambda: build_grassmann(3, 3, 1),
    }
    return builders[name]()


COMMUTATIVE = ["C5", "C3", "S3c", "S4c", "Q8c", "D4c", "J42", "J52", "J63", "G242"]


@pytest.fixture(params=COMMUTATIVE)
def commutative_scheme(request):
    return request.param, scheme(request.param)


def random_stochastic(rng, size):
    t = rng.random((size, size)) ** 2
    return t / t.sum(axis=1, keepdims=True)


def random_distribution(rng, size):
    p = rng.random(size)
    return p / p.sum()
