import math

import pytest

from core import ModelParams
from network import NetworkConfig
from solver import solve_partition

SEVEN_NODES = [
    ("A", 0, 0),
    ("B", 1, 0),
    ("C", 0, 1),
    ("D", 1, 1),
    ("E", 4, 4),
    ("F", 5, 4),
    ("G", 4, 5),
]


def oracle_bisect(f, lo, hi, iterations=200):
    """Plain bisection for a decreasing f with f(lo) > 0 > f(hi)."""
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_state0(tau, h, gamma):
    k = tau * (gamma - 1)
    return oracle_bisect(lambda s: tau * math.exp(k * (1 - s / 2) ** 2) * (1 - s) - h, 0.0, 1.0)


def oracle_next_size(b_prev, tau, h, gamma):
    def f(s):
        r = math.exp(tau / 2 * ((1 + b_prev) ** 2 + (1 - b_prev - s) ** 2))
        return tau * r ** (gamma - 1) * (1 - b_prev - s) - h

    return oracle_bisect(f, 0.0, 1.0 - b_prev)


@pytest.fixture
def params():
    return ModelParams(tau=1.0, h=0.2, gamma=2.0, alpha=0.5, psi=1.0)


@pytest.fixture
def partition(params):
    return solve_partition(params)


@pytest.fixture
def seven_nodes():
    return NetworkConfig.from_positions(SEVEN_NODES, delta=0.2, eta=0.1, h_net=0.05, eps_max=0.0, seed=7)
