"""Dense bounded-variable primal simplex.

Solves  max c.x  subject to  A x (<= or ==) b  and  lo <= x <= up  on small
dense instances.  The engine keeps its factorized state between calls so a
sequence of objectives over one polytope (the dominant access pattern here)
pays for phase one only once.  Anti-cycling uses Bland's rule: pivots switch
to smallest-index selection whenever a run of degenerate steps is detected,
which guarantees termination; between stalls the most-negative rule keeps
iteration counts low.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

LE = "<="
EQ = "=="

_STALL_LIMIT = 25


class SimplexError(RuntimeError):
    """Numerical failure or iteration cap exceeded."""


class InfeasibleError(SimplexError):
    """The constraint system admits no feasible point."""


class UnboundedError(SimplexError):
    """The objective is unbounded over the feasible set."""


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


class BoundedSimplex:
    """Reusable simplex state for one polytope; thread-safe via a lock."""

    def __init__(self, A, b, senses, lower, upper):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != len(b):
            raise ValueError("inconsistent constraint shapes")
        R, N = A.shape
        if R == 0:
            raise ValueError("at least one constraint row is required")
        senses = list(senses)
        if len(senses) != R or any(s not in (LE, EQ) for s in senses):
            raise ValueError("senses must be '<=' or '==' per row")
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != (N,) or upper.shape != (N,):
            raise ValueError("bounds must match the number of variables")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(~np.isfinite(lower) & ~np.isfinite(upper)):
            raise ValueError("variables without any finite bound are unsupported")

        self.R, self.N = R, N
        self.b = b
        self.senses = senses
        # Columns: N structural, R slacks, then artificials (added lazily).
        slack_up = np.array([np.inf if s == LE else 0.0 for s in senses])
        self.A_all = np.hstack([A, np.eye(R)])
        self.lo = np.concatenate([lower, np.zeros(R)])
        self.up = np.concatenate([upper, slack_up])
        self.n_art = 0
        self.feas_tol = 1e-9 * (1.0 + float(np.abs(b).max(initial=0.0)))
        self._state_ready = False
        self._lock = threading.Lock()
        self._pivots_since_refactor = 0

    # -- pickling: state is a cache, rebuild lazily on the other side --

    def __getstate__(self):
        d = self.__dict__.copy()
        d["_lock"] = None
        return d

    def __setstate__(self, d):
        self.__dict__.update(d)
        self._lock = threading.Lock()

    # -- public API ----------------------------------------------------

    def maximize(self, c) -> LPResult:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.N,):
            raise ValueError("objective length mismatch")
        with self._lock:
            if not self._state_ready:
                self._phase_one()
            c_all = np.zeros(self.A_all.shape[1])
            c_all[: self.N] = c
            iters = self._run(c_all, phase_one=False)
            self._check_primal()
            x = self.x[: self.N].copy()
            return LPResult(x=x, value=float(c @ x), iterations=iters)

    # -- setup ----------------------------------------------------------

    def _phase_one(self):
        R, N = self.R, self.N
        total = self.A_all.shape[1]
        x = np.zeros(total)
        finite_lo = np.isfinite(self.lo[:N])
        x[:N] = np.where(finite_lo, self.lo[:N], np.minimum(self.up[:N], 0.0))
        at_upper = np.zeros(total, dtype=bool)
        at_upper[:N] = ~finite_lo

        resid = self.b - self.A_all[:, :N] @ x[:N]
        basis = np.empty(R, dtype=int)
        art_rows = []
        art_signs = []
        for r in range(R):
            if self.senses[r] == LE and resid[r] >= -self.feas_tol:
                basis[r] = N + r
                x[N + r] = max(resid[r], 0.0)
            else:
                art_rows.append(r)
                art_signs.append(1.0 if resid[r] >= 0 else -1.0)
        if art_rows:
            cols = np.zeros((R, len(art_rows)))
            for k, (r, s) in enumerate(zip(art_rows, art_signs)):
                cols[r, k] = s
            self.A_all = np.hstack([self.A_all, cols])
            self.lo = np.concatenate([self.lo, np.zeros(len(art_rows))])
            self.up = np.concatenate([self.up, np.full(len(art_rows), np.inf)])
            total = self.A_all.shape[1]
            x = np.concatenate([x, np.zeros(len(art_rows))])
            at_upper = np.concatenate([at_upper, np.zeros(len(art_rows), dtype=bool)])
            for k, (r, s) in enumerate(zip(art_rows, art_signs)):
                j = total - len(art_rows) + k
                basis[r] = j
                x[j] = resid[r] * s
        self.n_art = len(art_rows)

        self.x = x
        self.at_upper = at_upper
        self.basis = basis
        self.is_basic = np.zeros(total, dtype=bool)
        self.is_basic[basis] = True
        self._refactor()
        self._state_ready = True

        if self.n_art:
            total = self.A_all.shape[1]
            c1 = np.zeros(total)
            c1[total - self.n_art :] = -1.0
            self._run(c1, phase_one=True)
            infeas = float(self.x[total - self.n_art :].sum())
            if infeas > 10 * self.feas_tol:
                raise InfeasibleError(f"phase one residual {infeas:.3e}")
            # Pin artificials at zero for all later objectives.
            self.up[total - self.n_art :] = 0.0
            self.x[total - self.n_art :] = 0.0

    # -- simplex core ----------------------------------------------------

    def _refactor(self):
        B = self.A_all[:, self.basis]
        try:
            T = np.linalg.solve(B, self.A_all)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis") from exc
        nonbasic = ~self.is_basic
        b_eff = self.b - self.A_all[:, nonbasic] @ self.x[nonbasic]
        xB = np.linalg.solve(B, b_eff)
        self.T = T
        self.x[self.basis] = xB
        self._pivots_since_refactor = 0

    def _run(self, c_all, phase_one: bool) -> int:
        R = self.R
        lo, up = self.lo, self.up
        d_tol = 1e-9 * (1.0 + float(np.abs(c_all).max()))
        step_tol = 10 * self.feas_tol
        maxiter = 2000 + 50 * (R + self.A_all.shape[1])
        refactor_every = 400 if R <= 400 else 4000
        stall = 0

        for it in range(maxiter):
            d = c_all - c_all[self.basis] @ self.T
            movable = ~self.is_basic & (lo < up)
            gain_up = movable & ~self.at_upper & (d > d_tol)
            gain_dn = movable & self.at_upper & (d < -d_tol)
            cand = np.flatnonzero(gain_up | gain_dn)
            if cand.size == 0:
                return it
            if stall >= _STALL_LIMIT:
                j = int(cand[0])  # Bland: smallest index
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = -1.0 if self.at_upper[j] else 1.0

            col = self.T[:, j]
            delta = direction * col
            xB = self.x[self.basis]
            lo_B, up_B = lo[self.basis], up[self.basis]
            ratios = np.full(R, np.inf)
            pos = delta > 1e-11
            neg = delta < -1e-11
            ratios[pos] = (xB[pos] - lo_B[pos]) / delta[pos]
            ratios[neg] = (xB[neg] - up_B[neg]) / delta[neg]
            np.maximum(ratios, 0.0, out=ratios)
            t_basic = float(ratios.min(initial=np.inf))
            t_flip = up[j] - lo[j]
            t = min(t_basic, t_flip)
            if not np.isfinite(t):
                raise UnboundedError("unbounded objective over the polytope")

            if t_flip <= t_basic:
                self.x[j] = up[j] if direction > 0 else lo[j]
                self.at_upper[j] = direction > 0
                self.x[self.basis] = xB - delta * t_flip
                stall = 0 if t_flip > step_tol else stall + 1
                continue

            blockers = np.flatnonzero(ratios <= t + 1e-9 * (1.0 + t))
            r_blk = int(blockers[np.argmin(self.basis[blockers])])  # Bland tie-break
            leaving = int(self.basis[r_blk])

            self.x[j] = self.x[j] + direction * t
            self.x[self.basis] = xB - delta * t
            self.x[leaving] = up[leaving] if delta[r_blk] < 0 else lo[leaving]
            self.at_upper[leaving] = delta[r_blk] < 0

            piv = self.T[r_blk, j]
            if abs(piv) < 1e-11:
                self._refactor()
                stall += 1
                continue
            self.basis[r_blk] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            row = self.T[r_blk] / piv
            colj = self.T[:, j].copy()
            colj[r_blk] = 0.0
            self.T -= np.outer(colj, row)
            self.T[r_blk] = row
            self.T[:, j] = 0.0
            self.T[r_blk, j] = 1.0

            stall = 0 if t > step_tol else stall + 1
            self._pivots_since_refactor += 1
            if self._pivots_since_refactor >= refactor_every:
                self._refactor()
        raise SimplexError("iteration cap exceeded")

    # -- verification -----------------------------------------------------

    def _residual(self) -> float:
        x_struct = self.x[: self.N]
        res = self.A_all[:, : self.N] @ x_struct - self.b
        worst = 0.0
        for r, s in enumerate(self.senses):
            worst = max(worst, res[r] if s == LE else abs(res[r]))
        worst = max(worst, float((self.lo[: self.N] - x_struct).max(initial=0.0)))
        worst = max(worst, float((x_struct - self.up[: self.N]).max(initial=0.0)))
        return worst

    def _check_primal(self):
        if self._residual() > 100 * self.feas_tol:
            # Accumulated drift: rebuild the factorization and re-derive x.
            self._refactor()
            if self._residual() > 100 * self.feas_tol:
                raise SimplexError(f"primal residual {self._residual():.3e} after refactor")
