"""Discrete probability measures, cost specifications, and cost-regularity probes.

Measures are finitely supported with integer point labels and optional real
coordinates.  Costs are either explicit matrices or parametric families
(powers of the Euclidean distance, optionally thresholded) evaluated lazily
on the point pairs of an instance.  All types are immutable after
construction and all operations are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

WEIGHT_SUM_TOL = 1e-12


def _as_float_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure.

    ``ids`` are distinct integer labels, ``coords`` (optional) is an
    ``(n, d)`` array of point coordinates, and ``weights`` is a probability
    vector.  Inputs whose weights do not sum to one within ``1e-12`` are
    rejected rather than renormalized.
    """

    ids: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=int)
        weights = _as_float_array(self.weights, "weights", 1)
        if ids.ndim != 1 or len(ids) != len(weights):
            raise ValueError("ids and weights must be 1-d of equal length")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("point ids must be distinct")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"weights must sum to 1 within {WEIGHT_SUM_TOL:g}, "
                f"got {float(weights.sum())!r}"
            )
        coords = self.coords
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            if coords.shape[0] != len(ids):
                raise ValueError("coords must have one row per point")
            if not np.all(np.isfinite(coords)):
                raise ValueError("coords contain non-finite entries")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "coords", coords)
        for arr in (self.ids, self.weights, self.coords):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int | None:
        return None if self.coords is None else self.coords.shape[1]

    def with_weights(self, weights) -> "DiscreteMeasure":
        """Same support points, new probability vector."""
        return DiscreteMeasure(self.ids, weights, self.coords)

    def restrict(self, indices) -> "DiscreteMeasure":
        """Sub-measure on a subset of points (weights renormalization is the
        caller's responsibility; the subset must already carry full mass)."""
        idx = np.asarray(indices, dtype=int)
        coords = None if self.coords is None else self.coords[idx]
        return DiscreteMeasure(self.ids[idx], self.weights[idx], coords)


def measure(weights, coords=None, ids=None) -> DiscreteMeasure:
    """Convenience constructor with default ids 0..n-1."""
    weights = np.asarray(weights, dtype=float)
    if ids is None:
        ids = np.arange(len(weights))
    return DiscreteMeasure(ids, weights, coords)


def support(m: DiscreteMeasure) -> np.ndarray:
    """Indices with strictly positive mass, ascending."""
    return np.flatnonzero(m.weights > 0.0)


@dataclass(frozen=True)
class CostMatrix:
    """Evaluated costs on point pairs, with the instance sup bound attached."""

    values: np.ndarray
    sup_bound: float = field(default=0.0)

    def __post_init__(self):
        values = _as_float_array(self.values, "cost matrix", 2)
        if np.any(values < 0):
            raise ValueError("cost entries must be nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sup_bound", float(values.max()) if values.size else 0.0)
        self.values.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


class CostSpec:
    """Base class for cost specifications; subclasses implement ``pairwise``."""

    def pairwise(self, x_coords: np.ndarray, y_coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def at(self, x, y) -> float:
        """Cost of a single point pair (coordinates, not indices)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return float(self.pairwise(x[None, :], y[None, :])[0, 0])


def _pairwise_distance(x_coords: np.ndarray, y_coords: np.ndarray) -> np.ndarray:
    if x_coords.ndim == 1:
        x_coords = x_coords[:, None]
    if y_coords.ndim == 1:
        y_coords = y_coords[:, None]
    if x_coords.shape[1] != y_coords.shape[1]:
        raise ValueError("coordinate dimensions differ")
    diff = x_coords[:, None, :] - y_coords[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


@dataclass(frozen=True)
class PowerDistance(CostSpec):
    """c(x, y) = ||x - y||^p for an exponent p >= 1/2."""

    p: float

    def __post_init__(self):
        if not self.p >= 0.5:
            raise ValueError("exponent must be >= 1/2")

    def pairwise(self, x_coords, y_coords):
        return _pairwise_distance(x_coords, y_coords) ** self.p


@dataclass(frozen=True)
class ThresholdedPower(CostSpec):
    """c(x, y) = min(||x - y||^p, T) for a threshold T > 0."""

    p: float
    threshold: float

    def __post_init__(self):
        if not self.p >= 0.5:
            raise ValueError("exponent must be >= 1/2")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")

    def pairwise(self, x_coords, y_coords):
        return np.minimum(_pairwise_distance(x_coords, y_coords) ** self.p, self.threshold)


@dataclass(frozen=True)
class RadialDistance(CostSpec):
    """c(x, y) = | ||x|| - ||y|| |, the distance between radii."""

    def pairwise(self, x_coords, y_coords):
        if x_coords.ndim == 1:
            x_coords = x_coords[:, None]
        if y_coords.ndim == 1:
            y_coords = y_coords[:, None]
        rx = np.linalg.norm(x_coords, axis=1)
        ry = np.linalg.norm(y_coords, axis=1)
        return np.abs(rx[:, None] - ry[None, :])


@dataclass(frozen=True)
class ExplicitMatrix(CostSpec):
    """Costs given directly as a matrix over the instance's point pairs."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = _as_float_array(self.matrix, "matrix", 2)
        if np.any(matrix < 0):
            raise ValueError("negative entry in explicit cost matrix")
        object.__setattr__(self, "matrix", matrix)
        self.matrix.setflags(write=False)

    def pairwise(self, x_coords, y_coords):
        # Explicit costs are positional; coordinate arguments only fix sizes.
        n = x_coords.shape[0]
        m = y_coords.shape[0]
        if self.matrix.shape != (n, m):
            raise ValueError(
                f"explicit matrix shape {self.matrix.shape} does not match "
                f"point sets ({n}, {m})"
            )
        return self.matrix


def cost_matrix(spec: CostSpec, x: DiscreteMeasure, y: DiscreteMeasure) -> CostMatrix:
    """Evaluate a cost specification on the point pairs of two measures."""
    if isinstance(spec, ExplicitMatrix):
        if spec.matrix.shape != (len(x), len(y)):
            raise ValueError(
                f"explicit matrix shape {spec.matrix.shape} does not match "
                f"point sets ({len(x)}, {len(y)})"
            )
        return CostMatrix(spec.matrix)
    if x.coords is None or y.coords is None:
        raise ValueError("parametric costs require point coordinates")
    return CostMatrix(spec.pairwise(x.coords, y.coords))


def bdd_sum(weights) -> float:
    """Sum of square roots of cell masses.

    Finite for any finite nonnegative weight vector with total mass at most
    one; serves as a summability diagnostic for truncated countable
    instances.
    """
    w = _as_float_array(weights, "weights", 1)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if w.sum() > 1.0 + WEIGHT_SUM_TOL:
        raise ValueError("weights must sum to at most 1")
    return float(np.sqrt(w).sum())


@dataclass(frozen=True)
class RegularityReport:
    """Probe-grid regularity estimate; a lower bound on the true constant."""

    holder_alpha: float
    holder_constant: float
    cell: tuple
    semiconcavity_lambda: float | None = None

    def __post_init__(self):
        if not (0 < self.holder_alpha <= 1):
            raise ValueError("holder_alpha must lie in (0, 1]")
        if self.holder_constant < 0:
            raise ValueError("holder_constant must be nonnegative")


def holder_estimate(spec: CostSpec, probe_x, probe_y, alpha: float) -> RegularityReport:
    """Empirical Hoelder constant of a cost over a probe grid.

    Maximizes |c(x,y) - c(x',y')| / (|x-x'|^alpha + |y-y'|^alpha) over all
    pairs of grid points; this lower-bounds the true constant.
    """
    px = _as_float_array(probe_x, "probe_x", 1)
    py = _as_float_array(probe_y, "probe_y", 1)
    if len(px) < 2 or len(py) < 2:
        raise ValueError("degenerate probe grid: need >= 2 points per axis")
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1]")
    c = spec.pairwise(px[:, None], py[:, None])
    flat = c.ravel()
    gx = np.repeat(px, len(py))
    gy = np.tile(py, len(px))
    num = np.abs(flat[:, None] - flat[None, :])
    den = (
        np.abs(gx[:, None] - gx[None, :]) ** alpha
        + np.abs(gy[:, None] - gy[None, :]) ** alpha
    )
    mask = den > 0
    constant = float((num[mask] / den[mask]).max()) if mask.any() else 0.0
    cell = ((float(px.min()), float(px.max())), (float(py.min()), float(py.max())))
    return RegularityReport(holder_alpha=alpha, holder_constant=constant, cell=cell)


def semiconcavity_check(spec: CostSpec, probe_x, probe_y, lam: float) -> bool:
    """Check that c(., y) - lam*||.||^2 is concave along probe lines.

    Requires uniformly spaced probes on each axis; tests centered second
    differences in both arguments against a tolerance scaled by the probed
    sup of the cost.
    """
    px = _as_float_array(probe_x, "probe_x", 1)
    py = _as_float_array(probe_y, "probe_y", 1)
    for axis in (px, py):
        if len(axis) >= 3:
            steps = np.diff(axis)
            if np.ptp(steps) > 1e-9 * (1 + abs(steps[0])):
                raise ValueError("probe spacing must be uniform")
    c = spec.pairwise(px[:, None], py[:, None])
    tol = 1e-8 * (1.0 + float(np.abs(c).max()))
    ok = True
    if len(px) >= 3:
        phi = c - lam * (px * px)[:, None]
        second = phi[2:] - 2 * phi[1:-1] + phi[:-2]
        ok &= bool(np.all(second <= tol))
    if len(py) >= 3:
        phi = c - lam * (py * py)[None, :]
        second = phi[:, 2:] - 2 * phi[:, 1:-1] + phi[:, :-2]
        ok &= bool(np.all(second <= tol))
    return ok


# -- JSON loading -----------------------------------------------------------

def _reject_unknown_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)} in {where}")


def measure_from_dict(doc: dict) -> DiscreteMeasure:
    """Parse ``{"points": [{"id", "coords"?}, ...], "weights": [...]}`` strictly."""
    if not isinstance(doc, dict):
        raise ValueError("measure document must be an object")
    _reject_unknown_keys(doc, {"points", "weights"}, "measure document")
    if "points" not in doc or "weights" not in doc:
        raise ValueError("measure document requires 'points' and 'weights'")
    points = doc["points"]
    if not isinstance(points, list) or not points:
        raise ValueError("'points' must be a nonempty list")
    ids = []
    coords = []
    has_coords = None
    for rec in points:
        if not isinstance(rec, dict):
            raise ValueError("each point must be an object")
        _reject_unknown_keys(rec, {"id", "coords"}, "point record")
        if "id" not in rec or not isinstance(rec["id"], int) or isinstance(rec["id"], bool):
            raise ValueError("each point requires an integer 'id'")
        ids.append(rec["id"])
        this_has = "coords" in rec
        if has_coords is None:
            has_coords = this_has
        elif has_coords != this_has:
            raise ValueError("either all points carry coords or none do")
        if this_has:
            coords.append(rec["coords"])
    return DiscreteMeasure(
        ids=np.asarray(ids),
        weights=np.asarray(doc["weights"], dtype=float),
        coords=np.asarray(coords, dtype=float) if has_coords else None,
    )


def cost_matrix_from_dict(doc: dict) -> ExplicitMatrix:
    """Parse ``{"matrix": [[...], ...]}`` strictly."""
    if not isinstance(doc, dict):
        raise ValueError("cost document must be an object")
    _reject_unknown_keys(doc, {"matrix"}, "cost document")
    if "matrix" not in doc:
        raise ValueError("cost document requires 'matrix'")
    return ExplicitMatrix(np.asarray(doc["matrix"], dtype=float))


def load_measure(path) -> DiscreteMeasure:
    with open(path, "r", encoding="utf-8") as fh:
        return measure_from_dict(json.load(fh))


def load_cost_matrix(path) -> ExplicitMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return cost_matrix_from_dict(json.load(fh))
