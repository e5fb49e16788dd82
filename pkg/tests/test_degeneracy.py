import numpy as np
import pytest

from otlimits.degeneracy import (
    all_trivial_test,
    bitrivial_check,
    c_projection,
    exists_trivial_test,
    min_potential_range,
    projected_measure_test,
)
from otlimits.dual_face import build_face, uniqueness_test
from otlimits.measures import cost_matrix, measure, support, PowerDistance
from otlimits.ot_core import solve_discrete_ot

from .conftest import random_instance


class TestProjectedMeasure:
    def test_equal_measures_zero_diagonal(self):
        w = [0.3, 0.3, 0.4]
        C = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        mu = measure(w)
        sol = solve_discrete_ot(mu, mu, C)
        rep = projected_measure_test(mu, mu, C, sol.value)
        assert rep.is_projected
        assert rep.projected_value == pytest.approx(0.0, abs=1e-12)

    def test_fig1a_directions(self, fixture_library, solved_faces):
        fx = fixture_library["fig1a_annulus"]
        sol, _ = solved_faces["fig1a_annulus"]
        rep_f = projected_measure_test(fx.mu, fx.nu, fx.cost.values, sol.value)
        assert rep_f.is_projected
        sol_T = solve_discrete_ot(fx.nu, fx.mu, fx.cost.values.T)
        rep_g = projected_measure_test(fx.nu, fx.mu, fx.cost.values.T, sol_T.value)
        assert not rep_g.is_projected

    def test_gamma_necessary_condition(self):
        rng = np.random.default_rng(30)
        seen_violation = False
        for _ in range(40):
            mu, nu, C = random_instance(rng)
            sol = solve_discrete_ot(mu, nu, C)
            rep = projected_measure_test(mu, nu, C, sol.value)
            covered = set(support(mu).tolist()) <= set(rep.gamma_set)
            if not covered:
                assert not rep.is_projected
                seen_violation = True
        assert seen_violation  # random instances are generically non-projected

    def test_projection_integral_lower_bounds_cost(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            mu, nu, C = random_instance(rng)
            sol = solve_discrete_ot(mu, nu, C)
            rep = projected_measure_test(mu, nu, C, sol.value)
            assert rep.projected_value <= rep.ot_value + 1e-9


class TestCProjection:
    def test_single_target_is_dirac(self):
        nu = measure([0.4, 0.6])
        C = np.array([[0.5, 0.3]])
        out = c_projection(nu, [0], C)
        assert out.weights.tolist() == [1.0]

    def test_line_example(self):
        # Targets at 0.4 and 2.0; both source atoms are nearer to 0.4.
        nu = measure([0.5, 0.5], coords=[[0.0], [1.0]])
        targets = measure([0.5, 0.5], coords=[[0.4], [2.0]])
        C = cost_matrix(PowerDistance(1.0), targets, nu)
        out = c_projection(nu, [0, 1], C.values, x=targets)
        assert out.weights.tolist() == [1.0, 0.0]

    def test_pushforward_is_projected(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            mu, nu, C = random_instance(rng, n=4, m=4)
            target = sorted(rng.choice(4, size=int(rng.integers(1, 4)), replace=False).tolist())
            pushed = c_projection(nu, target, C)
            sub = C[np.asarray(target)]
            sol = solve_discrete_ot(pushed, nu, sub)
            rep = projected_measure_test(pushed, nu, sub, sol.value)
            assert rep.is_projected

    def test_tie_break_invariance_of_projection_property(self):
        # Exact ties: both targets equidistant; either choice leaves the
        # pushforward projected.
        nu = measure([1.0], coords=[[0.0]])
        targets = measure([0.5, 0.5], coords=[[-1.0], [1.0]])
        C = cost_matrix(PowerDistance(1.0), targets, nu)
        out = c_projection(nu, [0, 1], C.values, x=targets)
        assert out.weights.tolist() == [1.0, 0.0]  # smallest index wins
        for w in ([1.0, 0.0], [0.0, 1.0]):  # either tie resolution
            cand = targets.with_weights(w)
            sol = solve_discrete_ot(cand, nu, C.values)
            assert projected_measure_test(cand, nu, C.values, sol.value).is_projected

    def test_fig1a_projection_matches_radial_map_off_seam(self, fixture_library):
        # All even outer atoms project radially; each odd one ties between
        # its neighbours and the smallest-index rule picks the lower angle,
        # except at the wrap-around column where index 0 wins.  The output
        # is therefore near-uniform and is itself a projected measure.
        fx = fixture_library["fig1a_annulus"]
        out = c_projection(fx.nu, range(32), fx.cost.values, x=fx.mu)
        w = out.weights
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.isclose(w[0], 3 / 64)          # gains the seam column
        assert np.isclose(w[31], 1 / 64)         # loses its odd column
        assert np.allclose(w[1:31], 2 / 64)
        sol = solve_discrete_ot(out, fx.nu, fx.cost.values)
        assert projected_measure_test(out, fx.nu, fx.cost.values, sol.value).is_projected

    def test_empty_target_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            c_projection(measure([1.0]), [], np.zeros((2, 1)))


class TestTrivialPotentials:
    def test_dirac_all_trivial(self, solved_faces, fixture_library):
        fx = fixture_library["dirac_pair"]
        _, face = solved_faces["dirac_pair"]
        assert all_trivial_test(face, fx.mu)

    def test_fig1a_sides(self, fixture_library, solved_faces):
        fx = fixture_library["fig1a_annulus"]
        sol, face = solved_faces["fig1a_annulus"]
        assert all_trivial_test(face, fx.mu)
        sol_T = solve_discrete_ot(fx.nu, fx.mu, fx.cost.values.T)
        face_T = build_face(fx.nu, fx.mu, fx.cost.values.T, sol_T)
        assert not all_trivial_test(face_T, fx.nu)

    def test_nonunique_fixture_not_all_trivial(self, solved_faces, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        _, face = solved_faces["nonunique_3pt"]
        assert not all_trivial_test(face, fx.mu)

    def test_exists_trivial_delegates_to_projection(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            mu, nu, C = random_instance(rng)
            sol = solve_discrete_ot(mu, nu, C)
            assert exists_trivial_test(mu, nu, C, sol.value) == \
                projected_measure_test(mu, nu, C, sol.value).is_projected

    def test_min_range_lp_agrees_with_projection(self):
        # Equivalence of the two characterizations, instance by instance:
        # a trivial potential exists iff the smallest face range vanishes.
        rng = np.random.default_rng(34)
        seen = {True: 0, False: 0}
        for trial in range(30):
            if trial % 3 == 0:  # equal measures with zero diagonal: projected
                w = rng.dirichlet(np.ones(3))
                C = rng.random((3, 3))
                np.fill_diagonal(C, 0.0)
                mu = nu = measure(w)
            else:
                mu, nu, C = random_instance(rng, n=3, m=3)
            sol = solve_discrete_ot(mu, nu, C)
            face = build_face(mu, nu, C, sol)
            lp_trivial = min_potential_range(face, mu) <= 1e-8
            assert lp_trivial == exists_trivial_test(mu, nu, C, sol.value)
            seen[lp_trivial] += 1
        assert seen[True] >= 1 and seen[False] >= 1

    def test_subset_support_blocks_trivial(self):
        # Different measures, target support inside the source support,
        # zero diagonal and positive off-diagonal: no trivial potential.
        mu = measure([1 / 3, 1 / 3, 1 / 3], coords=[[0.0], [1.0], [2.0]])
        nu = measure([0.5, 0.5, 0.0], coords=[[0.0], [1.0], [2.0]])
        C = cost_matrix(PowerDistance(1.0), mu, nu)
        sol = solve_discrete_ot(mu, nu, C)
        assert not exists_trivial_test(mu, nu, C.values, sol.value)


class TestBitrivial:
    def test_concentric_circles(self, fixture_library, solved_faces):
        fx = fixture_library["concentric_circles"]
        _, face = solved_faces["concentric_circles"]
        assert bitrivial_check(face, fx.mu, fx.nu)
        costs = [fx.cost.values[i, j] for i, j in face.tight_set]
        assert max(costs) - min(costs) <= 1e-8
        assert np.allclose(costs, abs(2.0 - 1.0), atol=1e-9)

    def test_fig1a_not_bitrivial(self, fixture_library, solved_faces):
        fx = fixture_library["fig1a_annulus"]
        _, face = solved_faces["fig1a_annulus"]
        assert not bitrivial_check(face, fx.mu, fx.nu)

    def test_dirac_bitrivial(self, fixture_library, solved_faces):
        fx = fixture_library["dirac_pair"]
        _, face = solved_faces["dirac_pair"]
        assert bitrivial_check(face, fx.mu, fx.nu)


class TestImplicationChain:
    def test_randomized_implications(self):
        # all_trivial => exists_trivial => supp(mu) inside the minimizer set.
        rng = np.random.default_rng(35)
        counts = {"all_trivial": 0, "exists_trivial": 0}
        for trial in range(60):
            kind = trial % 3
            if kind == 0:
                mu, nu, C = random_instance(rng, max_side=4)
            elif kind == 1:  # projected by construction
                _, nu, C = random_instance(rng, n=4, m=4)
                target = sorted(rng.choice(4, size=2, replace=False).tolist())
                mu = c_projection(nu, target, C)
                C = C[np.asarray(target)]
            else:  # source Dirac: everything trivial
                mu = measure([1.0])
                _, nu, C = random_instance(rng, n=1, m=3)
            sol = solve_discrete_ot(mu, nu, C)
            face = build_face(mu, nu, C, sol)
            a = all_trivial_test(face, mu)
            e = exists_trivial_test(mu, nu, C, sol.value)
            rep = projected_measure_test(mu, nu, C, sol.value)
            if a:
                counts["all_trivial"] += 1
                assert e
            if e:
                counts["exists_trivial"] += 1
                assert set(support(mu).tolist()) <= set(rep.gamma_set)
        assert counts["all_trivial"] >= 5
        assert counts["exists_trivial"] >= 15
