import numpy as np
import pytest

import regime_extract as rx

# Illustrative two-regime parameter set (volatility regimes well separated,
# exponential maintenance cost); satisfies every solvability condition.
A_KW = dict(rho=1/3, sigma1=0.38, sigma2=1.9, lambda1=1.7, lambda2=0.44, c=0.5)

# Equal-volatility set with quadratic cost: boundary is sigma/sqrt(2 rho).
B_KW = dict(rho=0.5, sigma1=1.0, sigma2=1.0, lambda1=1.0, lambda2=1.0, c=1.0)

# Parameter boxes known to satisfy the case-A solvability conditions.
FEASIBLE_BOXES = [
    ((0.030, 0.033), (0.023, 0.026), (0.76, 0.80), (0.015, 0.017), (0.014, 0.016)),
    ((0.025, 0.027), (0.038, 0.040), (0.63, 0.66), (0.40, 0.47), (0.042, 0.044)),
    ((0.32, 0.35), (0.18, 0.38), (1.6, 1.9), (1.5, 1.7), (0.42, 0.44)),
]

# Family that stays solvable as sigma1 -> sigma2 (case-B limit checks).
NEAR_EQUAL_KW = dict(rho=0.0818, sigma2=1.2464, lambda1=4.7887, lambda2=0.1557,
                     c=0.5)


def box_midpoint(box):
    return [0.5*(lo + hi) for lo, hi in box]


def draw_from_boxes(rng, n):
    """n parameter draws from the feasible boxes (rejecting rare misses)."""
    out = []
    while len(out) < n:
        box = FEASIBLE_BOXES[rng.integers(len(FEASIBLE_BOXES))]
        vals = [rng.uniform(lo, hi) for lo, hi in box]
        p = rx.validate(*vals, c=0.5, cost=rx.CostFunction.exponential(1/3))
        if rx.check_assumptions(p).solvable_case_a:
            out.append(p)
    return out


def draw_valid(rng):
    """A random valid parameter set (no feasibility requirement)."""
    return rx.validate(
        rho=10**rng.uniform(-2, 0.5), sigma1=10**rng.uniform(-1.5, 0.7),
        sigma2=10**rng.uniform(-1.5, 0.7), lambda1=10**rng.uniform(-2, 0.7),
        lambda2=10**rng.uniform(-2, 0.7), c=rng.uniform(0.05, 2.0),
        cost=rx.CostFunction.exponential(1/3))


@pytest.fixture(scope="session")
def params_a():
    return rx.validate(**A_KW, cost=rx.CostFunction.exponential(1/3))


@pytest.fixture(scope="session")
def roots_a(params_a):
    return rx.solve_characteristic(params_a)


@pytest.fixture(scope="session")
def sol_a(params_a):
    return rx.solve_z(params_a)


@pytest.fixture(scope="session")
def cs_a(sol_a):
    return rx.from_stopping(sol_a)


@pytest.fixture(scope="session")
def params_b():
    return rx.validate(**B_KW, cost=rx.CostFunction.quadratic(1.0, 1.0))


@pytest.fixture(scope="session")
def sol_b(params_b):
    return rx.solve_z(params_b)


@pytest.fixture(scope="session")
def cs_b(sol_b):
    return rx.from_stopping(sol_b)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240601)
