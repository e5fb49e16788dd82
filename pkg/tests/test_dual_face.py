import numpy as np
import pytest

from otlimits.dual_face import (
    FaceError,
    anchored_bounds,
    build_face,
    enumerate_face_vertices,
    sup_linear,
    sup_linear_epsilon,
    uniqueness_test,
)
from otlimits.limit_law import sample_gaussian
from otlimits.measures import cost_matrix, measure, PowerDistance
from otlimits.ot_core import TransportSolution, normalize_to_Fc, solve_discrete_ot
from otlimits.seeding import generator

from .conftest import random_instance
from .oracles import scipy_lp_max


def small_face(rng, n=3, m=3):
    mu, nu, C = random_instance(rng, n=n, m=m)
    sol = solve_discrete_ot(mu, nu, C)
    return mu, nu, C, sol, build_face(mu, nu, C, sol)


class TestBuildFace:
    def test_1x1_line(self):
        # The face is {(f, g): f + g = c} cut by the boxes; with the box
        # bound equal to the cost it collapses to the point (c, 0).
        mu = nu = measure([1.0])
        C = np.array([[0.6]])
        sol = solve_discrete_ot(mu, nu, C)
        face = build_face(mu, nu, C, sol)
        verts = enumerate_face_vertices(face)
        assert len(verts) >= 1
        assert all(abs(v[0] + v[1] - 0.6) <= 1e-9 for v in verts)
        assert face.contains(np.array([0.6]), np.array([0.0]))
        assert not face.contains(np.array([0.7]), np.array([-0.1]))

    def test_2x2_identity_tight_set(self):
        mu = measure([0.5, 0.5])
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        sol = solve_discrete_ot(mu, mu, C)
        face = build_face(mu, mu, C, sol)
        assert face.tight_set == [(0, 0), (1, 1)]

    def test_degenerate_3pt_has_multiple_vertices(self, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        sol = solve_discrete_ot(fx.mu, fx.nu, fx.cost)
        face = build_face(fx.mu, fx.nu, fx.cost, sol)
        verts = enumerate_face_vertices(face)
        f_parts = {tuple(np.round(v[:3] - v[0], 7)) for v in verts}
        assert len(f_parts) >= 2  # vertices distinct on the source atoms

    def test_broken_solution_rejected(self):
        mu = nu = measure([1.0])
        C = np.array([[1.0]])
        fake = TransportSolution(value=0.5, plan=np.array([[1.0]]),
                                 dual_f=np.array([0.0]), dual_g=np.array([0.0]))
        with pytest.raises(FaceError, match="duality gap"):
            build_face(mu, nu, C, fake)

    def test_normalized_dual_is_member(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            mu, nu, C, sol, face = small_face(rng)
            f, g = normalize_to_Fc(sol.dual_f, sol.dual_g, C)
            assert face.contains(f, g)

    def test_face_independent_of_optimal_plan(self):
        # All plans of this instance are optimal (cost has zero curvature);
        # faces built from different basic plans must expose the same suprema.
        mu = measure([0.5, 0.5])
        nu = measure([0.5, 0.5])
        C = np.array([[0.0, 1.0], [1.0, 2.0]])
        sol = solve_discrete_ot(mu, nu, C)
        face_a = build_face(mu, nu, C, sol)
        diag = TransportSolution(value=1.0, plan=np.diag([0.5, 0.5]),
                                 dual_f=sol.dual_f, dual_g=sol.dual_g)
        anti = TransportSolution(value=1.0, plan=np.array([[0.0, 0.5], [0.5, 0.0]]),
                                 dual_f=sol.dual_f, dual_g=sol.dual_g)
        face_b = build_face(mu, nu, C, diag)
        face_c = build_face(mu, nu, C, anti)
        rng = np.random.default_rng(0)
        for _ in range(10):
            z = sample_gaussian(mu, rng).z
            vals = [sup_linear(f, z).value for f in (face_a, face_b, face_c)]
            assert max(vals) - min(vals) <= 1e-8


class TestSupLinear:
    def test_zero_objective(self):
        rng = np.random.default_rng(15)
        *_, face = small_face(rng)
        n, m = face.shape
        assert sup_linear(face, np.zeros(n), np.zeros(m)).value == pytest.approx(0.0, abs=1e-10)

    def test_nonunique_direction_strictly_positive(self, solved_faces):
        _, face = solved_faces["nonunique_3pt"]
        val = sup_linear(face, np.array([1.0, -1.0, 0.0])).value
        assert val == pytest.approx(1.0, abs=1e-9)  # 1-Lipschitz profiles on {0,1,2}

    def test_equal_potential_pair_on_symmetric_instance(self):
        # Mirror-symmetric instance with a connected optimal basis: the two
        # outer atoms carry equal potential, so their difference direction
        # has zero supremum.
        mu = measure([0.25, 0.5, 0.25], coords=[[-1.0], [0.0], [1.0]])
        nu = measure([0.5, 0.5], coords=[[-0.5], [0.5]])
        C = cost_matrix(PowerDistance(1.0), mu, nu)
        sol = solve_discrete_ot(mu, nu, C)
        face = build_face(mu, nu, C, sol)
        assert uniqueness_test(face, mu)
        val = sup_linear(face, np.array([1.0, 0.0, -1.0])).value
        assert val == pytest.approx(0.0, abs=1e-9)

    def test_shift_direction_rejected(self):
        rng = np.random.default_rng(16)
        *_, face = small_face(rng)
        with pytest.raises(ValueError, match="shift-null"):
            sup_linear(face, np.array([1.0, 0.0, 0.0]))

    def test_oracle_equivalence_tiny(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            mu, nu, C, sol, face = small_face(rng, n=int(rng.integers(1, 4)),
                                              m=int(rng.integers(1, 4)))
            verts = enumerate_face_vertices(face)
            assert len(verts) >= 1
            n = len(mu)
            for _ in range(4):
                z = sample_gaussian(mu, rng).z
                lp_val = sup_linear(face, z).value
                oracle = float((verts[:, :n] @ z).max())
                assert lp_val == pytest.approx(oracle, abs=1e-9)

    def test_box_enlargement_invariance(self):
        rng = np.random.default_rng(18)
        for _ in range(10):
            mu, nu, C, sol, face = small_face(rng)
            wide = face.with_box_bound(face.box_bound * 10)
            z = sample_gaussian(mu, rng).z
            a = sup_linear(face, z).value
            b = sup_linear(wide, z).value
            assert a == pytest.approx(b, abs=1e-8)

    def test_argmax_is_member(self):
        rng = np.random.default_rng(19)
        mu, nu, C, sol, face = small_face(rng)
        z = sample_gaussian(mu, rng).z
        res = sup_linear(face, z)
        assert face.contains(res.f, res.g)


class TestEpsilonFace:
    def test_epsilon_zero_matches_face(self, solved_faces, fixture_library):
        fx = fixture_library["unique_3x3"]
        sol, face = solved_faces["unique_3x3"]
        z = sample_gaussian(fx.mu, generator(0, "eps")).z
        direct = sup_linear(face, z).value
        relaxed = sup_linear_epsilon(fx.mu, fx.nu, fx.cost, sol.value, 0.0, z)
        assert relaxed == pytest.approx(direct, abs=1e-7)

    def test_huge_epsilon_is_box_supremum(self):
        rng = np.random.default_rng(21)
        mu, nu, C, sol, face = small_face(rng)
        z = sample_gaussian(mu, rng).z
        B = C.max()
        val = sup_linear_epsilon(mu, nu, C, sol.value, 2.0 * B, z)
        # Reference: drop the near-optimality row entirely.
        n, m = C.shape
        rows, rhs = [], []
        for i in range(n):
            for j in range(m):
                row = np.zeros(n + m)
                row[i] = 1.0
                row[n + j] = 1.0
                rows.append(row)
                rhs.append(C[i, j])
        ref = scipy_lp_max(
            np.concatenate([z, np.zeros(m)]), rows, rhs, ["<="] * len(rows),
            [-B] * n + [-B] * m, [B] * n + [0.0] * m,
        )
        assert val == pytest.approx(ref, abs=1e-7)

    def test_monotone_and_convergent(self, solved_faces, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        sol, face = solved_faces["nonunique_3pt"]
        z = sample_gaussian(fx.mu, generator(5, "eps")).z
        vals = [
            sup_linear_epsilon(fx.mu, fx.nu, fx.cost, sol.value, 10.0 ** (-k), z)
            for k in range(1, 9)
        ]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(sup_linear(face, z).value, abs=1e-7)

    def test_sandwich(self, solved_faces, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        sol, face = solved_faces["nonunique_3pt"]
        rng = generator(6, "eps")
        for _ in range(5):
            z = sample_gaussian(fx.mu, rng).z
            base = sup_linear(face, z).value
            for eps in (0.0, 1e-6, 1e-2, 1.0):
                relaxed = sup_linear_epsilon(fx.mu, fx.nu, fx.cost, sol.value, eps, z)
                assert relaxed >= base - 1e-9

    def test_negative_epsilon_rejected(self, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        with pytest.raises(ValueError, match="nonnegative"):
            sup_linear_epsilon(fx.mu, fx.nu, fx.cost, 0.0, -1e-3, np.zeros(3))


class TestUniqueness:
    def test_1x1_unique(self):
        mu = nu = measure([1.0])
        C = np.array([[0.3]])
        sol = solve_discrete_ot(mu, nu, C)
        assert uniqueness_test(build_face(mu, nu, C, sol), mu)

    def test_identity_coupling_with_offdiagonal_slack_not_unique(self):
        # Zero-cost identity coupling with positive slack elsewhere leaves a
        # disconnected tight set, so potentials differ by non-constant
        # amounts; the vertex oracle confirms a fat face.
        mu = measure([0.5, 0.5])
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        sol = solve_discrete_ot(mu, mu, C)
        face = build_face(mu, mu, C, sol)
        verts = enumerate_face_vertices(face)
        spread = max(v[0] - v[1] for v in verts) - min(v[0] - v[1] for v in verts)
        assert spread > 1e-6
        assert not uniqueness_test(face, mu)

    def test_connected_basis_unique(self):
        mu = measure([0.3, 0.7])
        nu = measure([0.6, 0.4])
        C = np.array([[0.2, 0.9], [0.5, 0.1]])
        sol = solve_discrete_ot(mu, nu, C)
        assert uniqueness_test(build_face(mu, nu, C, sol), mu)

    def test_degenerate_fixture_not_unique(self, solved_faces, fixture_library):
        _, face = solved_faces["nonunique_3pt"]
        assert not uniqueness_test(face, fixture_library["nonunique_3pt"].mu)

    def test_anchored_bounds_match_vertices(self, solved_faces, fixture_library):
        fx = fixture_library["nonunique_3pt"]
        _, face = solved_faces["nonunique_3pt"]
        lo, hi, _ = anchored_bounds(face, side="f", measure=fx.mu)
        verts = enumerate_face_vertices(face)
        diffs = verts[:, :3] - verts[:, [0]]
        assert np.allclose(hi, diffs.max(axis=0), atol=1e-9)
        assert np.allclose(lo, diffs.min(axis=0), atol=1e-9)


class TestSummary:
    def test_summary_shape(self, solved_faces):
        _, face = solved_faces["unique_3x3"]
        s = face.summary()
        assert s["unique"] is True
        assert s["n_probe_vertices"] >= 1
        assert all(len(pair) == 2 for pair in s["tight_set"])
