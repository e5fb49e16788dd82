import numpy as np
import pytest

from otlimits._simplex import EQ, LE, BoundedSimplex, InfeasibleError, SimplexError

from .oracles import scipy_lp_max


def random_lp(rng, n_vars=None, n_rows=None):
    n = n_vars or int(rng.integers(2, 7))
    r = n_rows or int(rng.integers(1, 9))
    A = rng.normal(size=(r, n))
    senses = [EQ if rng.random() < 0.25 else LE for _ in range(r)]
    # Anchor the right-hand side at a bounded feasible point.
    lower = -rng.random(n) * 2 - 0.1
    upper = rng.random(n) * 2 + 0.1
    x0 = lower + rng.random(n) * (upper - lower)
    slack = np.where([s == LE for s in senses], rng.random(r) * 0.5, 0.0)
    b = A @ x0 + slack
    return A, b, senses, lower, upper


class TestAgainstReference:
    def test_random_lps_match_reference(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(120):
            A, b, senses, lower, upper = random_lp(rng)
            c = rng.normal(size=A.shape[1])
            ref = scipy_lp_max(c, A, b, senses, lower, upper)
            if ref is None:
                continue
            lp = BoundedSimplex(A, b, senses, lower, upper)
            got = lp.maximize(c)
            assert got.value == pytest.approx(ref, abs=1e-7)
            checked += 1
        assert checked >= 100

    def test_repeated_objectives_share_state(self):
        rng = np.random.default_rng(11)
        A, b, senses, lower, upper = random_lp(rng, n_vars=5, n_rows=6)
        lp = BoundedSimplex(A, b, senses, lower, upper)
        for _ in range(30):
            c = rng.normal(size=5)
            ref = scipy_lp_max(c, A, b, senses, lower, upper)
            if ref is None:
                continue
            assert lp.maximize(c).value == pytest.approx(ref, abs=1e-7)

    def test_solution_feasible(self):
        rng = np.random.default_rng(5)
        A, b, senses, lower, upper = random_lp(rng, n_vars=4, n_rows=5)
        lp = BoundedSimplex(A, b, senses, lower, upper)
        res = lp.maximize(rng.normal(size=4))
        assert np.all(res.x >= lower - 1e-8)
        assert np.all(res.x <= upper + 1e-8)
        for row, bb, s in zip(A, b, senses):
            v = row @ res.x
            assert v <= bb + 1e-7 if s == LE else abs(v - bb) <= 1e-7


class TestEdgeCases:
    def test_infeasible_detected(self):
        # x <= -1 with x in [0, 1]
        lp = BoundedSimplex([[1.0]], [-1.0], [LE], [0.0], [1.0])
        with pytest.raises(InfeasibleError):
            lp.maximize(np.array([1.0]))

    def test_equality_row(self):
        # x + y == 1, maximize x with boxes
        lp = BoundedSimplex([[1.0, 1.0]], [1.0], [EQ], [0.0, 0.0], [1.0, 1.0])
        res = lp.maximize(np.array([1.0, 0.0]))
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_vertex(self):
        # Many redundant constraints through one corner; Bland must terminate.
        A = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]
        b = [0.0, 0.0, 0.0, 0.0, 0.0]
        lp = BoundedSimplex(A, b, [LE] * 5, [-1.0, -1.0], [1.0, 1.0])
        res = lp.maximize(np.array([1.0, 1.0]))
        assert res.value == pytest.approx(0.0, abs=1e-9)

    def test_unsupported_free_variable(self):
        with pytest.raises(ValueError, match="finite bound"):
            BoundedSimplex([[1.0]], [1.0], [LE], [-np.inf], [np.inf])

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            BoundedSimplex([[1.0]], [1.0, 2.0], [LE], [0.0], [1.0])
