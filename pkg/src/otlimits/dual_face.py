"""The polytope of all dual optimizers of a discrete transport instance.

Every dual optimum is tight on the support of any optimal plan
(complementary slackness), so the set of optimizers restricted to the
instance's points is the polytope

    f_i + g_j <= C_ij   for all pairs,   with equality on the tight set,
    -B <= f <= B,  -B <= g <= 0          with B the instance sup cost.

Linear objectives that put no weight on the common shift direction attain
the same supremum over this box-relaxed polytope as over the conjugate
closure it represents, which is what every limit functional here needs.
"""

from __future__ import annotations

import threading
from itertools import combinations

import numpy as np

from ._simplex import EQ, LE, BoundedSimplex, InfeasibleError
from .measures import DiscreteMeasure, support
from .ot_core import (
    SUPPORT_TAU,
    TransportSolution,
    _cost_values,
    duality_gap,
    normalize_to_Fc,
)

SHIFT_NULL_TOL = 1e-12
RANGE_TOL = 1e-8


class FaceError(RuntimeError):
    """The face polytope is broken (signals an invalid solution)."""


class SupResult(tuple):
    """(value, f, g) of a linear maximization over the face."""

    __slots__ = ()

    def __new__(cls, value, f, g):
        return tuple.__new__(cls, (value, f, g))

    @property
    def value(self):
        return self[0]

    @property
    def f(self):
        return self[1]

    @property
    def g(self):
        return self[2]


class DualFace:
    """Immutable face description plus a cached LP over it."""

    def __init__(self, mu, nu, C, tight_set, ot_value, box_bound, start_f, start_g):
        self.mu = mu
        self.nu = nu
        self.C = np.asarray(_cost_values(C))
        self.tight_set = sorted(tight_set)
        self.ot_value = float(ot_value)
        self.box_bound = float(box_bound)
        self.start_f = np.asarray(start_f, dtype=float)
        self.start_g = np.asarray(start_g, dtype=float)
        self._lp: BoundedSimplex | None = None
        self._lp_lock = threading.Lock()
        self._anchored: dict = {}

    # LP state is a cache; drop it when pickling for worker processes.
    def __getstate__(self):
        d = self.__dict__.copy()
        d["_lp"] = None
        d["_lp_lock"] = None
        d["_anchored"] = {}
        return d

    def __setstate__(self, d):
        self.__dict__.update(d)
        self._lp_lock = threading.Lock()

    @property
    def shape(self) -> tuple[int, int]:
        return self.C.shape

    def lp(self) -> BoundedSimplex:
        with self._lp_lock:
            if self._lp is None:
                self._lp = _face_lp(self.C, self.tight_set, self.box_bound)
            return self._lp

    def with_box_bound(self, box_bound: float) -> "DualFace":
        """Same face data with a different bounding box (for invariance checks)."""
        return DualFace(
            self.mu, self.nu, self.C, self.tight_set, self.ot_value,
            box_bound, self.start_f, self.start_g,
        )

    def contains(self, f, g, tol: float = 1e-8) -> bool:
        """Membership check against all defining constraints."""
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        slack = self.C - f[:, None] - g[None, :]
        if float(slack.min()) < -tol:
            return False
        if self.tight_set and max(abs(slack[i, j]) for i, j in self.tight_set) > tol:
            return False
        B = self.box_bound
        if np.any(np.abs(f) > B + tol) or np.any(g > tol) or np.any(g < -B - tol):
            return False
        obj = float(self.mu.weights @ f + self.nu.weights @ g)
        return abs(obj - self.ot_value) <= max(tol, 1e-8)

    def summary(self) -> dict:
        """JSON-ready face summary."""
        lo_f, hi_f, verts = anchored_bounds(self, side="f")
        unique = bool(np.max(hi_f - lo_f, initial=0.0) <= RANGE_TOL / 2)
        return {
            "ot_value": self.ot_value,
            "tight_set": [[int(i), int(j)] for i, j in self.tight_set],
            "n_probe_vertices": len(verts),
            "unique": unique,
        }


def _face_lp(C: np.ndarray, tight_set, box_bound: float) -> BoundedSimplex:
    n, m = C.shape
    N = n + m
    rows = []
    b = []
    senses = []
    tight = set(map(tuple, tight_set))
    for i in range(n):
        for j in range(m):
            row = np.zeros(N)
            row[i] = 1.0
            row[n + j] = 1.0
            rows.append(row)
            b.append(C[i, j])
            senses.append(EQ if (i, j) in tight else LE)
    lower = np.concatenate([np.full(n, -box_bound), np.full(m, -box_bound)])
    upper = np.concatenate([np.full(n, box_bound), np.zeros(m)])
    return BoundedSimplex(np.array(rows), np.array(b), senses, lower, upper)


def build_face(mu: DiscreteMeasure, nu: DiscreteMeasure, C, solution: TransportSolution,
               tau: float = SUPPORT_TAU) -> DualFace:
    """Face of all dual optimizers, anchored on one optimal plan's support."""
    cost = _cost_values(C)
    scale = 1.0 + float(np.abs(cost).max())
    gap = duality_gap(solution, mu, nu, cost)
    if abs(gap) > 1e-9 * scale:
        raise FaceError(f"solution has duality gap {gap:.3e}")
    tight_set = solution.support(tau)
    f0, g0 = normalize_to_Fc(solution.dual_f, solution.dual_g, cost)
    face = DualFace(
        mu=mu, nu=nu, C=cost, tight_set=tight_set,
        ot_value=solution.value, box_bound=float(np.abs(cost).max()),
        start_f=f0, start_g=g0,
    )
    if not face.contains(f0, g0, tol=1e-7 * scale):
        raise FaceError("normalized solver dual is not a member of the face")
    return face


def _check_shift_null(z: np.ndarray, w: np.ndarray) -> None:
    drift = abs(float(z.sum()) - float(w.sum()))
    if drift > SHIFT_NULL_TOL * (1.0 + float(np.abs(z).max(initial=0.0))
                                 + float(np.abs(w).max(initial=0.0))):
        raise ValueError(f"objective is not shift-null (drift {drift:.3e})")


def sup_linear(face: DualFace, z, w=None) -> SupResult:
    """Exact supremum of z.f + w.g over the face, attained at a vertex."""
    n, m = face.shape
    z = np.zeros(n) if z is None else np.asarray(z, dtype=float)
    w = np.zeros(m) if w is None else np.asarray(w, dtype=float)
    if z.shape != (n,) or w.shape != (m,):
        raise ValueError("objective length mismatch")
    _check_shift_null(z, w)
    res = face.lp().maximize(np.concatenate([z, w]))
    return SupResult(res.value, res.x[:n], res.x[n:])


class EpsilonFace:
    """Near-optimizer polytope: dual feasible with objective >= value - eps."""

    def __init__(self, mu, nu, C, ot_value: float, epsilon: float):
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        self.mu = mu
        self.nu = nu
        self.C = np.asarray(_cost_values(C))
        self.ot_value = float(ot_value)
        self.epsilon = float(epsilon)
        self.box_bound = float(np.abs(self.C).max())
        n, m = self.C.shape
        N = n + m
        rows = []
        b = []
        senses = []
        for i in range(n):
            for j in range(m):
                row = np.zeros(N)
                row[i] = 1.0
                row[n + j] = 1.0
                rows.append(row)
                b.append(self.C[i, j])
                senses.append(LE)
        row = np.zeros(N)
        row[:n] = -mu.weights
        row[n:] = -nu.weights
        rows.append(row)
        b.append(-(self.ot_value - self.epsilon))
        senses.append(LE)
        lower = np.concatenate([np.full(n, -self.box_bound), np.full(m, -self.box_bound)])
        upper = np.concatenate([np.full(n, self.box_bound), np.zeros(m)])
        self._lp = BoundedSimplex(np.array(rows), np.array(b), senses, lower, upper)

    def maximize(self, z, w) -> float:
        n, m = self.C.shape
        z = np.zeros(n) if z is None else np.asarray(z, dtype=float)
        w = np.zeros(m) if w is None else np.asarray(w, dtype=float)
        _check_shift_null(z, w)
        try:
            return float(self._lp.maximize(np.concatenate([z, w])).value)
        except InfeasibleError as exc:
            raise FaceError("near-optimizer polytope is empty") from exc


def sup_linear_epsilon(mu, nu, C, ot_value: float, epsilon: float, z, w=None) -> float:
    """Supremum of z.f + w.g over the eps-relaxed optimizer set."""
    return EpsilonFace(mu, nu, C, ot_value, epsilon).maximize(z, w)


def anchored_bounds(face: DualFace, side: str = "f", measure: DiscreteMeasure | None = None):
    """Exact ranges of potential differences to an anchor atom.

    For every support atom i of the relevant measure, computes the minimum
    and maximum of f_i - f_r (or g_i - g_r) over the face, where r is the
    first support atom.  Returns ``(lo, hi, probe_vertices)`` with the LP
    argmax vertices collected for face probing; results are cached per
    (side, support) on the face.
    """
    n, m = face.shape
    if side == "f":
        meas = face.mu if measure is None else measure
        offset, size = 0, n
    elif side == "g":
        meas = face.nu if measure is None else measure
        offset, size = n, m
    else:
        raise ValueError("side must be 'f' or 'g'")
    atoms = support(meas)
    if len(meas) != size:
        raise ValueError("measure does not match the face axis")
    key = (side, tuple(atoms.tolist()))
    if key in face._anchored:
        return face._anchored[key]

    N = n + m
    lp = face.lp()
    lo = np.zeros(len(atoms))
    hi = np.zeros(len(atoms))
    verts: list[np.ndarray] = []
    anchor = offset + int(atoms[0])
    for sign in (1.0, -1.0):
        c = np.zeros(N)
        c[anchor] = sign
        verts.append(lp.maximize(c).x)
    for k, atom in enumerate(atoms[1:], start=1):
        c = np.zeros(N)
        c[offset + int(atom)] = 1.0
        c[anchor] = -1.0
        res_hi = lp.maximize(c)
        res_lo = lp.maximize(-c)
        hi[k] = res_hi.value
        lo[k] = -res_lo.value
        verts.append(res_hi.x)
        verts.append(res_lo.x)
    uniq: list[np.ndarray] = []
    seen = set()
    for v in verts:
        tag = tuple(np.round(v, 7).tolist())
        if tag not in seen:
            seen.add(tag)
            uniq.append(v)
    out = (lo, hi, uniq)
    face._anchored[key] = out
    return out


def uniqueness_test(face: DualFace, mu: DiscreteMeasure) -> bool:
    """Whether all face members agree up to an additive constant on supp(mu).

    Pairwise differences f_i - f_k are constant over the face exactly when
    all differences to a fixed anchor atom are, so the check runs two LPs
    per support atom at half the pairwise tolerance.
    """
    lo, hi, _ = anchored_bounds(face, side="f", measure=mu)
    return bool(np.max(hi - lo, initial=0.0) <= RANGE_TOL / 2)


def enumerate_face_vertices(face: DualFace, max_dim: int = 8) -> np.ndarray:
    """All vertices of the face polytope by constraint enumeration.

    Exponential; restricted to tiny instances where it serves as an
    independent oracle for the LP path.
    """
    n, m = face.shape
    N = n + m
    if N > max_dim:
        raise ValueError(f"vertex enumeration limited to dimension {max_dim}")
    B = face.box_bound
    tight = set(map(tuple, face.tight_set))
    normals = []
    rhs = []
    required = []
    for i in range(n):
        for j in range(m):
            row = np.zeros(N)
            row[i] = 1.0
            row[n + j] = 1.0
            normals.append(row)
            rhs.append(face.C[i, j])
            required.append((i, j) in tight)
    for k in range(N):
        for sign, bound in ((1.0, B if k < n else 0.0), (-1.0, B)):
            row = np.zeros(N)
            row[k] = sign
            normals.append(row)
            rhs.append(bound)
            required.append(False)
    normals = np.array(normals)
    rhs = np.array(rhs)
    req_idx = [k for k, r in enumerate(required) if r]
    free_idx = [k for k, r in enumerate(required) if not r]
    # Reduce the required equalities to an independent core.
    core: list[int] = []
    for k in req_idx:
        trial = normals[core + [k]]
        if np.linalg.matrix_rank(trial, tol=1e-10) == len(core) + 1:
            core.append(k)
    need = N - len(core)
    verts = []
    tol = 1e-9 * (1.0 + B)
    for extra in combinations(free_idx, need):
        idx = core + list(extra)
        A = normals[idx]
        try:
            x = np.linalg.solve(A, rhs[idx])
        except np.linalg.LinAlgError:
            continue
        if float((normals @ x - rhs).max()) > tol:
            continue
        if req_idx and float(np.abs(normals[req_idx] @ x - rhs[req_idx]).max()) > tol:
            continue
        verts.append(x)
    if not verts:
        return np.empty((0, N))
    verts = np.array(verts)
    _, keep = np.unique(np.round(verts, 7), axis=0, return_index=True)
    return verts[np.sort(keep)]
