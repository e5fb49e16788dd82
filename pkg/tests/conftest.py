import numpy as np
import pytest

from otlimits import build_face, fixtures, solve_discrete_ot
from otlimits.measures import measure


def random_instance(rng, n=None, m=None, max_side=5, zero_atom=False, costs=None):
    """Random discrete pair with costs in [0, 1]."""
    n = n or int(rng.integers(1, max_side + 1))
    m = m or int(rng.integers(1, max_side + 1))
    w1 = rng.random(n) + 1e-3
    if zero_atom and n > 1:
        w1[int(rng.integers(0, n))] = 0.0
    w1 /= w1.sum()
    w2 = rng.random(m) + 1e-3
    w2 /= w2.sum()
    C = rng.random((n, m)) if costs is None else costs
    return measure(w1), measure(w2), C


@pytest.fixture(scope="session")
def fixture_library():
    return {name: fixtures.load(name) for name in fixtures.FIXTURE_NAMES}


@pytest.fixture(scope="session")
def solved_faces(fixture_library):
    """Population solve and face per discrete fixture, shared across tests."""
    out = {}
    for name, fx in fixture_library.items():
        if fx.is_semidiscrete:
            continue
        sol = solve_discrete_ot(fx.mu, fx.nu, fx.cost)
        out[name] = (sol, build_face(fx.mu, fx.nu, fx.cost, sol))
    return out


@pytest.fixture(scope="session")
def solved_faces_transposed(fixture_library):
    """Role-swapped solve and face (conjugate side) per discrete fixture."""
    out = {}
    for name, fx in fixture_library.items():
        if fx.is_semidiscrete:
            continue
        CT = fx.cost.values.T
        sol = solve_discrete_ot(fx.nu, fx.mu, CT)
        out[name] = (sol, build_face(fx.nu, fx.mu, CT, sol))
    return out
