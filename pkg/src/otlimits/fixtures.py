"""Built-in instance library with asserted structural properties.

Each fixture ships with its expected uniqueness/triviality flags; ``load``
returns the instance and ``validate`` recomputes the flags from scratch and
raises on any mismatch, so a broken fixture cannot silently feed the
experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .semidiscrete import DensityMeasure1D
from .measures import (
    CostMatrix,
    CostSpec,
    DiscreteMeasure,
    ExplicitMatrix,
    PowerDistance,
    RadialDistance,
    cost_matrix,
    measure,
)

FIXTURE_NAMES = (
    "dirac_pair",
    "unique_3x3",
    "nonunique_3pt",
    "fig1a_annulus",
    "concentric_circles",
    "semidiscrete_3atom",
)

# fig1a_annulus discretization constants: one uniform ring of outer atoms,
# inner atoms at every other outer angle so each odd outer atom ties between
# its two angular neighbours.  The ties force every optimizer to be constant
# on the inner circle while the outer conjugates stay non-constant.
FIG1A_N_OUTER = 64
FIG1A_N_INNER = 32
FIG1A_R_OUTER = 2.0
FIG1A_R_INNER = 1.0

CONCENTRIC_N = 16
CONCENTRIC_RADII = (1.0, 2.0)

SEMIDISCRETE_ATOMS = (0.2, 0.5, 0.9)
SEMIDISCRETE_WEIGHTS = (0.3, 0.4, 0.3)


@dataclass(frozen=True)
class Fixture:
    """A named instance plus its expected structural flags.

    Discrete fixtures carry both marginals and the evaluated cost; the
    semi-discrete fixture instead carries a density description in
    ``nu_density`` and leaves ``nu``/``cost`` unset.
    """

    name: str
    mu: DiscreteMeasure
    cost_spec: CostSpec
    expect_unique: bool
    expect_exists_trivial_f: bool
    expect_exists_trivial_g: bool
    expect_all_trivial_f: bool
    expect_all_trivial_g: bool
    expect_bitrivial: bool
    nu: DiscreteMeasure | None = None
    cost: CostMatrix | None = None
    nu_density: "DensityMeasure1D | None" = None

    @property
    def is_semidiscrete(self) -> bool:
        return self.nu_density is not None


def _dirac_pair() -> Fixture:
    mu = measure([1.0], coords=[[0.0]])
    nu = measure([1.0], coords=[[0.75]])
    spec = PowerDistance(1.0)
    return Fixture(
        name="dirac_pair", mu=mu, nu=nu, cost_spec=spec,
        cost=cost_matrix(spec, mu, nu),
        expect_unique=True,
        expect_exists_trivial_f=True, expect_exists_trivial_g=True,
        expect_all_trivial_f=True, expect_all_trivial_g=True,
        expect_bitrivial=True,
    )


def _unique_3x3() -> Fixture:
    # Generic weights and costs giving a non-degenerate optimal basis
    # (5 support arcs), hence a unique non-trivial optimizer.
    mu = measure([0.5, 0.3, 0.2])
    nu = measure([0.4, 0.35, 0.25])
    spec = ExplicitMatrix(np.array([
        [0.1, 0.9, 0.8],
        [0.7, 0.2, 0.9],
        [0.9, 0.5, 0.3],
    ]))
    return Fixture(
        name="unique_3x3", mu=mu, nu=nu, cost_spec=spec,
        cost=cost_matrix(spec, mu, nu),
        expect_unique=True,
        expect_exists_trivial_f=False, expect_exists_trivial_g=False,
        expect_all_trivial_f=False, expect_all_trivial_g=False,
        expect_bitrivial=False,
    )


def _nonunique_3pt() -> Fixture:
    # Equal measures on three collinear points: zero cost, disconnected
    # tight set, and a two-dimensional face (all 1-Lipschitz profiles).
    coords = [[0.0], [1.0], [2.0]]
    mu = measure([1 / 3] * 3, coords=coords)
    nu = measure([1 / 3] * 3, coords=coords)
    spec = PowerDistance(1.0)
    return Fixture(
        name="nonunique_3pt", mu=mu, nu=nu, cost_spec=spec,
        cost=cost_matrix(spec, mu, nu),
        expect_unique=False,
        expect_exists_trivial_f=True, expect_exists_trivial_g=True,
        expect_all_trivial_f=False, expect_all_trivial_g=False,
        expect_bitrivial=False,
    )


def fig1a_points() -> tuple[np.ndarray, np.ndarray]:
    angles_out = 2 * np.pi * np.arange(FIG1A_N_OUTER) / FIG1A_N_OUTER
    angles_in = angles_out[::2]
    inner = np.stack(
        [FIG1A_R_INNER * np.cos(angles_in), FIG1A_R_INNER * np.sin(angles_in)], axis=1
    )
    outer = np.stack(
        [FIG1A_R_OUTER * np.cos(angles_out), FIG1A_R_OUTER * np.sin(angles_out)], axis=1
    )
    return inner, outer


def _fig1a_annulus() -> Fixture:
    inner, outer = fig1a_points()
    mu = measure(np.full(FIG1A_N_INNER, 1.0 / FIG1A_N_INNER), coords=inner)
    nu = measure(np.full(FIG1A_N_OUTER, 1.0 / FIG1A_N_OUTER), coords=outer)
    spec = PowerDistance(1.0)
    return Fixture(
        name="fig1a_annulus", mu=mu, nu=nu, cost_spec=spec,
        cost=cost_matrix(spec, mu, nu),
        expect_unique=True,
        expect_exists_trivial_f=True, expect_exists_trivial_g=False,
        expect_all_trivial_f=True, expect_all_trivial_g=False,
        expect_bitrivial=False,
    )


def _concentric_circles() -> Fixture:
    r1, r2 = CONCENTRIC_RADII
    angles = 2 * np.pi * np.arange(CONCENTRIC_N) / CONCENTRIC_N
    X = np.stack([r1 * np.cos(angles), r1 * np.sin(angles)], axis=1)
    Y = np.stack([r2 * np.cos(angles), r2 * np.sin(angles)], axis=1)
    mu = measure(np.full(CONCENTRIC_N, 1.0 / CONCENTRIC_N), coords=X)
    nu = measure(np.full(CONCENTRIC_N, 1.0 / CONCENTRIC_N), coords=Y)
    spec = RadialDistance()
    return Fixture(
        name="concentric_circles", mu=mu, nu=nu, cost_spec=spec,
        cost=cost_matrix(spec, mu, nu),
        expect_unique=True,
        expect_exists_trivial_f=True, expect_exists_trivial_g=True,
        expect_all_trivial_f=True, expect_all_trivial_g=True,
        expect_bitrivial=True,
    )


def _semidiscrete_3atom() -> Fixture:
    mu = measure(SEMIDISCRETE_WEIGHTS, coords=[[a] for a in SEMIDISCRETE_ATOMS])
    density = DensityMeasure1D(interval=(0.0, 1.0), kind="uniform")
    return Fixture(
        name="semidiscrete_3atom", mu=mu, cost_spec=PowerDistance(1.0),
        nu_density=density,
        expect_unique=True,
        expect_exists_trivial_f=False, expect_exists_trivial_g=False,
        expect_all_trivial_f=False, expect_all_trivial_g=False,
        expect_bitrivial=False,
    )


_BUILDERS = {
    "dirac_pair": _dirac_pair,
    "unique_3x3": _unique_3x3,
    "nonunique_3pt": _nonunique_3pt,
    "fig1a_annulus": _fig1a_annulus,
    "concentric_circles": _concentric_circles,
    "semidiscrete_3atom": _semidiscrete_3atom,
}


def load(name: str) -> Fixture:
    if name not in _BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    return _BUILDERS[name]()


def validate(fixture: Fixture) -> dict:
    """Recompute the structural flags from scratch; raise on any mismatch."""
    if fixture.is_semidiscrete:
        got = _validate_semidiscrete(fixture)
    else:
        got = _validate_discrete(fixture)
    expected = {
        "unique": fixture.expect_unique,
        "exists_trivial_f": fixture.expect_exists_trivial_f,
        "exists_trivial_g": fixture.expect_exists_trivial_g,
        "all_trivial_f": fixture.expect_all_trivial_f,
        "all_trivial_g": fixture.expect_all_trivial_g,
        "bitrivial": fixture.expect_bitrivial,
    }
    mismatches = {
        k: {"expected": expected[k], "got": got[k]}
        for k in expected if k in got and expected[k] != got[k]
    }
    if mismatches:
        raise AssertionError(f"fixture {fixture.name}: flag mismatches {mismatches}")
    return got


def _validate_discrete(fixture: Fixture) -> dict:
    from .degeneracy import all_trivial_test, bitrivial_check, exists_trivial_test
    from .dual_face import build_face, uniqueness_test
    from .ot_core import solve_discrete_ot

    mu, nu, C = fixture.mu, fixture.nu, fixture.cost
    sol = solve_discrete_ot(mu, nu, C)
    face = build_face(mu, nu, C, sol)
    sol_T = solve_discrete_ot(nu, mu, C.values.T)
    face_T = build_face(nu, mu, C.values.T, sol_T)
    return {
        "unique": uniqueness_test(face, mu),
        "exists_trivial_f": exists_trivial_test(mu, nu, C.values, sol.value),
        "exists_trivial_g": exists_trivial_test(nu, mu, C.values.T, sol_T.value),
        "all_trivial_f": all_trivial_test(face, mu),
        "all_trivial_g": all_trivial_test(face_T, nu),
        "bitrivial": bitrivial_check(face, mu, nu),
    }


def _validate_semidiscrete(fixture: Fixture) -> dict:
    # Connected density support pins uniqueness; triviality of the atom-side
    # potential is read off the population solve directly.
    from .limit_law import normal_limit_params
    from .semidiscrete import solve_semidiscrete

    density = fixture.nu_density
    state = solve_semidiscrete(fixture.mu, density, fixture.cost_spec)
    spread = float(state.f.max() - state.f.min())
    variance = normal_limit_params(state.f, fixture.mu)
    got = {
        "unique": bool(density.connected_support),
        "all_trivial_f": spread <= 1e-8,
        "exists_trivial_f": spread <= 1e-8,  # unique side: exists == all
    }
    if got["unique"] and not got["all_trivial_f"] and variance <= 0:
        raise AssertionError("non-constant potential with zero variance")
    return got
