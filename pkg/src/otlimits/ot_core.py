"""Exact optimal transport between finitely supported measures.

The solver is a network simplex on the dense bipartite transportation graph.
It returns the optimal value, a basic optimal plan (spanning-tree support),
and the tree duals, which satisfy complementary slackness with the plan by
construction.  A brute-force enumeration of transportation-polytope vertices
serves as an independent oracle on tiny instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .measures import CostMatrix, DiscreteMeasure

X_TO_Y = "x_to_y"
Y_TO_X = "y_to_x"

MARGINAL_TOL = 1e-10
SUPPORT_TAU = 1e-10

_STALL_LIMIT = 40


class SolverError(RuntimeError):
    """Internal solver failure (should not occur on valid instances)."""


def _cost_values(C) -> np.ndarray:
    if isinstance(C, CostMatrix):
        return C.values
    arr = np.asarray(C, dtype=float)
    if arr.ndim != 2:
        raise ValueError("cost matrix must be 2-dimensional")
    return arr


@dataclass(frozen=True)
class TransportSolution:
    """Optimal value, plan, and one dual pair from the solver's tree basis."""

    value: float
    plan: np.ndarray
    dual_f: np.ndarray
    dual_g: np.ndarray

    def support(self, tau: float = SUPPORT_TAU) -> list[tuple[int, int]]:
        """Plan support above the mass threshold, row-major order."""
        rows, cols = np.nonzero(self.plan > tau)
        return list(zip(rows.tolist(), cols.tolist()))


def solve_discrete_ot(mu: DiscreteMeasure, nu: DiscreteMeasure, C) -> TransportSolution:
    """Exact discrete OT via network simplex with Bland anti-cycling."""
    cost = _cost_values(C)
    n, m = cost.shape
    if len(mu) != n or len(nu) != m:
        raise ValueError(
            f"dimension mismatch: cost is {cost.shape}, measures are "
            f"({len(mu)}, {len(nu)})"
        )
    if not np.all(np.isfinite(cost)):
        raise ValueError("non-finite cost entry")

    a = mu.weights
    b = nu.weights
    flows, basis = _northwest_corner(a, b)
    # Keep the stopping tolerance within the 1e-9 dual-feasibility contract.
    tol = min(1e-10 * (1.0 + float(np.abs(cost).max())), 1e-9)

    adj: list[set[int]] = [set() for _ in range(n + m)]
    rows, cols = np.nonzero(basis)
    for i, j in zip(rows.tolist(), cols.tolist()):
        adj[i].add(n + j)
        adj[n + j].add(i)
    f, g = _tree_duals(adj, cost, n, m)

    maxiter = 2000 + 60 * n * m
    stall = 0
    for _ in range(maxiter):
        reduced = cost - f[:, None] - g[None, :]
        viol = (reduced < -tol) & ~basis
        if not viol.any():
            # Incremental duals drift slightly; recompute once and recheck.
            f, g = _tree_duals(adj, cost, n, m)
            reduced = cost - f[:, None] - g[None, :]
            viol = (reduced < -tol) & ~basis
            if not viol.any():
                plan = np.where(flows > 0, flows, 0.0)
                value = float(np.sum(plan * cost))
                sol = TransportSolution(value=value, plan=plan, dual_f=f, dual_g=g)
                _validate_solution(sol, a, b, cost)
                return sol
        flat = np.flatnonzero(viol.ravel())
        if stall >= _STALL_LIMIT:
            enter = int(flat[0])  # Bland: smallest arc index
        else:
            enter = int(flat[np.argmin(reduced.ravel()[flat])])
        ei, ej = divmod(enter, m)
        r_enter = float(reduced[ei, ej])

        cycle = _tree_cycle(adj, n, m, ei, ej)
        minus = cycle[1::2]
        theta = min(flows[i, j] for i, j in minus)
        # Bland tie-break on the leaving arc: smallest flattened index.
        leave = min((i, j) for i, j in minus if flows[i, j] <= theta + 1e-15)
        sign = 1.0
        for i, j in cycle:
            flows[i, j] += sign * theta
            sign = -sign
        flows[leave[0], leave[1]] = 0.0
        basis[ei, ej] = True
        basis[leave[0], leave[1]] = False

        # Re-tie duals: cutting the leaving arc splits the tree; the side
        # missing the root shifts by the entering arc's reduced cost.
        adj[leave[0]].discard(n + leave[1])
        adj[n + leave[1]].discard(leave[0])
        comp = _component(adj, ei)
        if 0 in comp:
            for u in _component(adj, n + ej):
                if u < n:
                    f[u] -= r_enter
                else:
                    g[u - n] += r_enter
        else:
            for u in comp:
                if u < n:
                    f[u] += r_enter
                else:
                    g[u - n] -= r_enter
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)

        stall = stall + 1 if theta <= 1e-14 else 0
    raise SolverError("pivot cap exceeded")


def _component(adj: list[set[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    """Initial spanning-tree basis with exactly n+m-1 arcs."""
    n, m = len(a), len(b)
    flows = np.zeros((n, m))
    basis = np.zeros((n, m), dtype=bool)
    s = a.astype(float).copy()
    d = b.astype(float).copy()
    i = j = 0
    while True:
        q = max(min(s[i], d[j]), 0.0)
        flows[i, j] = q
        basis[i, j] = True
        s[i] -= q
        d[j] -= q
        if i == n - 1 and j == m - 1:
            break
        if s[i] <= 0 and i < n - 1:
            i += 1
        elif j < m - 1:
            j += 1
        else:
            i += 1
    return flows, basis


def _tree_duals(adj: list[set[int]], cost: np.ndarray, n: int, m: int):
    """Duals from the spanning tree, rooted at row 0 with f[0] = 0."""
    f = np.zeros(n)
    g = np.zeros(m)
    seen = np.zeros(n + m, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            count += 1
            if v >= n:
                g[v - n] = cost[u, v - n] - f[u]
            else:
                f[v] = cost[v, u - n] - g[u - n]
            stack.append(v)
    if count != n + m:
        raise SolverError("basis does not span the bipartite graph")
    return f, g


def _tree_cycle(adj: list[set[int]], n: int, m: int, ei: int, ej: int):
    """Arcs of the unique cycle closed by the entering arc, entering first."""
    # Path from entering row node to entering column node through the tree.
    target = n + ej
    parent = {ei: -1}
    stack = [ei]
    while stack:
        u = stack.pop()
        if u == target:
            break
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                stack.append(v)
    if target not in parent:
        raise SolverError("entering arc endpoints are disconnected in the tree")
    path = [target]
    while path[-1] != ei:
        path.append(parent[path[-1]])
    path.reverse()  # ei ... target
    cycle = [(ei, ej)]
    for u, v in zip(path, path[1:]):
        i, j = (u, v - n) if v >= n else (v, u - n)
        cycle.append((i, j))
    return cycle


def _validate_solution(sol: TransportSolution, a, b, cost):
    scale = 1.0 + float(np.abs(cost).max())
    if np.any(sol.plan < 0):
        raise SolverError("negative plan entry")
    row_err = float(np.abs(sol.plan.sum(axis=1) - a).max())
    col_err = float(np.abs(sol.plan.sum(axis=0) - b).max())
    if max(row_err, col_err) > MARGINAL_TOL:
        raise SolverError(f"marginal violation {max(row_err, col_err):.3e}")
    feas = float((sol.dual_f[:, None] + sol.dual_g[None, :] - cost).max())
    if feas > 1e-9:
        raise SolverError(f"dual infeasibility {feas:.3e}")
    gap = duality_gap(sol, a, b, cost)
    if abs(gap) > 1e-9 * scale:
        raise SolverError(f"duality gap {gap:.3e}")


def duality_gap(sol: TransportSolution, mu, nu, C) -> float:
    """Primal cost minus dual objective; nonnegative up to roundoff."""
    cost = _cost_values(C)
    a = mu.weights if isinstance(mu, DiscreteMeasure) else np.asarray(mu, dtype=float)
    b = nu.weights if isinstance(nu, DiscreteMeasure) else np.asarray(nu, dtype=float)
    primal = float(np.sum(sol.plan * cost))
    dual = float(a @ sol.dual_f + b @ sol.dual_g)
    return primal - dual


def c_transform(values, C, direction: str = X_TO_Y) -> np.ndarray:
    """Conjugate of a dual vector: row/column minima of C minus the vector."""
    cost = _cost_values(C)
    v = np.asarray(values, dtype=float)
    if direction == X_TO_Y:
        if len(v) != cost.shape[0]:
            raise ValueError("vector length must match the number of rows")
        return (cost - v[:, None]).min(axis=0)
    if direction == Y_TO_X:
        if len(v) != cost.shape[1]:
            raise ValueError("vector length must match the number of columns")
        return (cost - v[None, :]).min(axis=1)
    raise ValueError(f"unknown direction {direction!r}")


def normalize_to_Fc(f, g, C) -> tuple[np.ndarray, np.ndarray]:
    """Double-conjugate a feasible dual pair and shift it into the standard box.

    The result satisfies g' = (f')^c with max g' = 0, -sup(c) <= g' <= 0 and
    -sup(c) <= f' <= sup(c); the dual objective is unchanged or improved.
    """
    cost = _cost_values(C)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    tol = 1e-9 * (1.0 + float(np.abs(cost).max()))
    if float((f[:, None] + g[None, :] - cost).max()) > tol:
        raise ValueError("dual pair is infeasible")
    g1 = c_transform(f, cost, X_TO_Y)
    f1 = c_transform(g1, cost, Y_TO_X)
    a = float(g1.max())
    return f1 + a, g1 - a


def brute_force_ot(mu: DiscreteMeasure, nu: DiscreteMeasure, C) -> float:
    """Exact optimum by enumerating all spanning-tree bases of the polytope.

    Independent of the simplex machinery: flows on each candidate tree are
    solved by leaf elimination and infeasible trees are discarded.
    """
    cost = _cost_values(C)
    n, m = cost.shape
    if n + m > 10:
        raise ValueError("instance too large for brute force (|X|+|Y| <= 10)")
    if len(mu) != n or len(nu) != m:
        raise ValueError("dimension mismatch")
    a, b = mu.weights, nu.weights
    arcs = [(i, j) for i in range(n) for j in range(m)]
    best = np.inf
    for tree in combinations(arcs, n + m - 1):
        flows = _tree_flows(tree, a, b, n, m)
        if flows is None:
            continue
        if min(flows.values()) < -1e-12:
            continue
        total = sum(cost[i, j] * q for (i, j), q in flows.items())
        best = min(best, total)
    if not np.isfinite(best):
        raise SolverError("no feasible basis found")
    return float(best)


def _tree_flows(tree, a, b, n, m):
    """Flows on a candidate basis via leaf elimination; None if not a tree."""
    degree = [0] * (n + m)
    inc: list[list[int]] = [[] for _ in range(n + m)]
    for k, (i, j) in enumerate(tree):
        degree[i] += 1
        degree[n + j] += 1
        inc[i].append(k)
        inc[n + j].append(k)
    need = list(a) + list(b)
    used = [False] * len(tree)
    flows: dict[tuple[int, int], float] = {}
    leaves = [u for u in range(n + m) if degree[u] == 1]
    for _ in range(len(tree)):
        if not leaves:
            return None  # cycle: not a spanning tree
        u = leaves.pop()
        k = next((kk for kk in inc[u] if not used[kk]), None)
        if k is None:
            return None
        used[k] = True
        i, j = tree[k]
        v = n + j if u == i else i
        q = need[u]
        flows[(i, j)] = q
        need[u] = 0.0
        need[v] -= q
        degree[u] -= 1
        degree[v] -= 1
        if degree[v] == 1:
            leaves.append(v)
    if max(abs(x) for x in need) > 1e-9:
        return None
    return flows
