"""Degeneracy criteria: projected measures, c-projections, trivial potentials.

A measure mu is nu-projected when mass can be coupled so that every
transported pair realizes the pointwise minimum cost to supp(mu);
equivalently the transport cost equals the integral of that pointwise
minimum.  Trivial (constant-on-support) potentials exist exactly in that
case, and the limit law of the empirical cost degenerates exactly when all
potentials are trivial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._simplex import EQ, LE, BoundedSimplex
from .dual_face import RANGE_TOL, DualFace, anchored_bounds
from .measures import DiscreteMeasure, support
from .ot_core import _cost_values


@dataclass(frozen=True)
class ProjectionReport:
    """Outcome of the projected-measure equality test."""

    projected_value: float
    ot_value: float
    is_projected: bool
    gamma_set: tuple[int, ...]

    def __post_init__(self):
        if self.projected_value > self.ot_value + 1e-9:
            raise ValueError(
                "projection integral exceeds the transport cost "
                f"({self.projected_value!r} > {self.ot_value!r})"
            )

    def to_json(self) -> dict:
        return {
            "projected_value": self.projected_value,
            "ot_value": self.ot_value,
            "is_projected": self.is_projected,
            "gamma_set": list(self.gamma_set),
        }


def projected_measure_test(mu: DiscreteMeasure, nu: DiscreteMeasure, C,
                           ot_value: float) -> ProjectionReport:
    """Test OT(mu, nu) = integral of min_{x in supp(mu)} c(x, .) dnu.

    Also reports the union of cost-minimizing support atoms over supp(nu)
    (all tying indices included); containment of supp(mu) in that set is
    necessary for trivial potentials.
    """
    cost = _cost_values(C)
    supp_mu = support(mu)
    supp_nu = support(nu)
    sub = cost[np.ix_(supp_mu, supp_nu)]
    col_min = sub.min(axis=0)
    projected_value = float(nu.weights[supp_nu] @ col_min)
    tol = 1e-9 * (1.0 + float(np.abs(cost).max()))
    gamma: set[int] = set()
    for jj in range(len(supp_nu)):
        ties = np.flatnonzero(sub[:, jj] <= col_min[jj] + tol)
        gamma.update(int(supp_mu[t]) for t in ties)
    return ProjectionReport(
        projected_value=projected_value,
        ot_value=float(ot_value),
        is_projected=bool(abs(float(ot_value) - projected_value) <= tol),
        gamma_set=tuple(sorted(gamma)),
    )


def c_projection(nu: DiscreteMeasure, target_indices, C,
                 x: DiscreteMeasure | None = None) -> DiscreteMeasure:
    """Pushforward of nu under the map sending each atom to its cheapest
    target row.

    Ties (within the same scaled tolerance used for the minimizer set, so
    that geometrically exact ties computed in floating point count as ties)
    resolve to the smallest target index.  The projected-measure property of
    the output does not depend on the resolution.
    """
    cost = _cost_values(C)
    target = np.asarray(sorted(set(int(t) for t in target_indices)), dtype=int)
    if len(target) == 0:
        raise ValueError("empty projection target")
    if target.min() < 0 or target.max() >= cost.shape[0]:
        raise ValueError("target index out of range")
    sub = cost[target]
    tol = 1e-9 * (1.0 + float(np.abs(cost).max()))
    weights = np.zeros(len(target))
    for j in support(nu):
        col = sub[:, j]
        chosen = int(np.flatnonzero(col <= col.min() + tol)[0])
        weights[chosen] += nu.weights[j]
    if x is not None:
        return x.restrict(target).with_weights(weights)
    return DiscreteMeasure(ids=target, weights=weights)


def all_trivial_test(face: DualFace, mu: DiscreteMeasure) -> bool:
    """Whether every face member is constant on supp(mu)."""
    lo, hi, _ = anchored_bounds(face, side="f", measure=mu)
    spread = max(float(np.max(hi, initial=0.0)), float(-np.min(lo, initial=0.0)))
    return spread <= RANGE_TOL / 2


def exists_trivial_test(mu: DiscreteMeasure, nu: DiscreteMeasure, C,
                        ot_value: float) -> bool:
    """Whether some potential is constant on supp(mu); equals the
    projected-measure test."""
    return projected_measure_test(mu, nu, C, ot_value).is_projected


def bitrivial_check(face: DualFace, mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    """Both sides trivial: potentials constant on supp(mu) and conjugates
    constant on supp(nu).  When this holds, the cost must be constant on the
    tight set (all mass moves at the same cost), which is verified."""
    f_trivial = all_trivial_test(face, mu)
    lo, hi, _ = anchored_bounds(face, side="g", measure=nu)
    g_trivial = max(float(np.max(hi, initial=0.0)), float(-np.min(lo, initial=0.0))) <= RANGE_TOL / 2
    if not (f_trivial and g_trivial):
        return False
    costs = np.array([face.C[i, j] for i, j in face.tight_set])
    if costs.size and float(costs.max() - costs.min()) > RANGE_TOL:
        raise RuntimeError(
            "bi-trivial face with non-constant cost on the tight set "
            f"(spread {float(costs.max() - costs.min()):.3e})"
        )
    return True


def min_potential_range(face: DualFace, mu: DiscreteMeasure) -> float:
    """Smallest range of a face member over supp(mu), via one auxiliary LP.

    Zero (within tolerance) exactly when a trivial potential exists; used as
    an independent cross-check of the projected-measure route.
    """
    n, m = face.shape
    N = n + m
    atoms = support(mu)
    B = face.box_bound
    tight = set(map(tuple, face.tight_set))
    rows = []
    b = []
    senses = []
    for i in range(n):
        for j in range(m):
            row = np.zeros(N + 2)
            row[i] = 1.0
            row[n + j] = 1.0
            rows.append(row)
            b.append(face.C[i, j])
            senses.append(EQ if (i, j) in tight else LE)
    for i in atoms:
        row = np.zeros(N + 2)
        row[int(i)] = 1.0
        row[N + 1] = -1.0  # f_i <= h
        rows.append(row)
        b.append(0.0)
        senses.append(LE)
        row = np.zeros(N + 2)
        row[int(i)] = -1.0
        row[N] = 1.0  # l <= f_i
        rows.append(row)
        b.append(0.0)
        senses.append(LE)
    lower = np.concatenate([np.full(n, -B), np.full(m, -B), [-B, -B]])
    upper = np.concatenate([np.full(n, B), np.zeros(m), [B, B]])
    c = np.zeros(N + 2)
    c[N] = 1.0
    c[N + 1] = -1.0  # maximize l - h
    lp = BoundedSimplex(np.array(rows), np.array(b), senses, lower, upper)
    return -float(lp.maximize(c).value)
