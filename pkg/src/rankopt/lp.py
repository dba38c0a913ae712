"""Dense two-phase tableau simplex for the small LPs of the rank optimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Feasibility tolerance for constraint satisfaction and phase-1 residuals.
EPS_FEAS = 1e-9

_RC_TOL = 1e-9          # reduced-cost threshold for entering columns
_PIVOT_TOL = 1e-9       # smallest acceptable pivot element in the ratio test
_DEGENERATE_STREAK = 40  # consecutive degenerate pivots before Bland's rule

DEFAULT_PIVOT_BUDGET = 10_000

RELATIONS = ("<=", "=", ">=")


class LpInstabilityError(RuntimeError):
    """No simplex progress within the pivot budget; input is ill-conditioned."""


@dataclass(frozen=True)
class LinearProgram:
    """Maximize ``objective @ x`` subject to rows ``a @ x (rel) rhs`` and box bounds.

    Every variable needs a finite lower bound; upper bounds may be ``math.inf``.
    """

    objective: np.ndarray
    rows: tuple[tuple[np.ndarray, str, float], ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        objective = np.asarray(self.objective, dtype=float)
        object.__setattr__(self, "objective", objective)
        n = objective.size
        rows = []
        for coeffs, rel, rhs in self.rows:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.size != n:
                raise ValueError(f"constraint has {coeffs.size} coefficients, expected {n}")
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            rows.append((coeffs, rel, float(rhs)))
        object.__setattr__(self, "rows", tuple(rows))
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != n:
            raise ValueError(f"{len(bounds)} bounds for {n} variables")
        for lo, hi in bounds:
            if not math.isfinite(lo):
                raise ValueError("every variable needs a finite lower bound")
            if lo > hi:
                raise ValueError(f"bound lo={lo} exceeds hi={hi}")
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float
    x: np.ndarray | None


def solve_lp(lp: LinearProgram, pivot_budget: int = DEFAULT_PIVOT_BUDGET) -> LpResult:
    """Solve the LP to a vertex optimum with a deterministic pivot order."""
    n = lp.objective.size
    lo = np.array([b[0] for b in lp.bounds])
    hi = np.array([b[1] for b in lp.bounds])

    # Shift to y = x - lo >= 0; finite upper bounds become extra rows.
    rows = [(coeffs, rel, rhs - float(coeffs @ lo)) for coeffs, rel, rhs in lp.rows]
    for j in np.nonzero(np.isfinite(hi))[0]:
        unit = np.zeros(n)
        unit[j] = 1.0
        rows.append((unit, "<=", hi[j] - lo[j]))

    solver = _Tableau(n, rows)
    status = solver.run(lp.objective, pivot_budget)
    if status != "optimal":
        return LpResult(status, math.nan, None)
    y = solver.solution()
    x = y + lo
    return LpResult("optimal", float(lp.objective @ x), x)


class _Tableau:
    """Standard-form simplex state; variables are the shifted non-negative y."""

    def __init__(self, n: int, rows: list[tuple[np.ndarray, str, float]]):
        self.n = n
        normalized = []
        for coeffs, rel, rhs in rows:
            if rhs < 0:
                coeffs, rel, rhs = -coeffs, {"<=": ">=", ">=": "<=", "=": "="}[rel], -rhs
            normalized.append((coeffs, rel, rhs))
        m = len(normalized)
        n_slack = sum(1 for _, rel, _ in normalized if rel != "=")
        n_art = sum(1 for _, rel, _ in normalized if rel != "<=")
        self.n_real = n + n_slack
        A = np.zeros((m, self.n_real + n_art))
        b = np.zeros(m)
        basis = np.empty(m, dtype=int)
        art_cols: set[int] = set()
        slack_at = n
        art_at = self.n_real
        for i, (coeffs, rel, rhs) in enumerate(normalized):
            A[i, :n] = coeffs
            b[i] = rhs
            if rel == "<=":
                A[i, slack_at] = 1.0
                basis[i] = slack_at
                slack_at += 1
            else:
                if rel == ">=":
                    A[i, slack_at] = -1.0
                    slack_at += 1
                A[i, art_at] = 1.0
                basis[i] = art_at
                art_cols.add(art_at)
                art_at += 1
        self.A0 = A
        self.b0 = b.copy()
        self.basis = basis
        self.art_cols = art_cols
        self.T = np.hstack([A, b.reshape(-1, 1)]).astype(float)
        self.pivots_used = 0

    def run(self, objective: np.ndarray, pivot_budget: int) -> str:
        m = self.T.shape[0]
        if m == 0:
            # Only the box remains: optimum sits at the shifted origin unless
            # some objective coefficient rewards an unbounded variable.
            if np.any(objective > _RC_TOL):
                return "unbounded"
            return "optimal"
        if self.art_cols:
            obj1 = np.zeros(self.T.shape[1])
            for j in self.art_cols:
                obj1[j] = -1.0
            obj_row = obj1.copy()
            for i in range(m):
                if self.basis[i] in self.art_cols:
                    obj_row += self.T[i]
            status = self._pivot_loop(obj_row, pivot_budget, forbid=self.art_cols)
            if status == "unbounded":
                # Phase 1 is bounded by construction; treat as instability.
                raise LpInstabilityError("phase-1 relaxation reported unbounded")
            if status != "optimal":
                return status
            if -obj_row[-1] < -EPS_FEAS:
                return "infeasible"
            self._purge_artificials(obj_row)
        obj_row = np.zeros(self.T.shape[1])
        obj_row[: self.n] = objective
        for i in range(self.T.shape[0]):
            cb = obj_row[self.basis[i]]
            if cb != 0.0:
                obj_row -= cb * self.T[i]
        return self._pivot_loop(obj_row, pivot_budget, forbid=set())

    def _pivot_loop(self, obj_row: np.ndarray, pivot_budget: int, forbid: set[int]) -> str:
        bland = False
        degenerate_streak = 0
        rc_width = self.T.shape[1] - 1
        mask = np.zeros(rc_width, dtype=bool)
        for j in forbid:
            if j < rc_width:
                mask[j] = True
        while True:
            rc = obj_row[:rc_width].copy()
            rc[mask] = -np.inf
            if bland:
                candidates = np.nonzero(rc > _RC_TOL)[0]
                if candidates.size == 0:
                    return "optimal"
                enter = int(candidates[0])
            else:
                enter = int(np.argmax(rc))
                if rc[enter] <= _RC_TOL:
                    return "optimal"
            col = self.T[:, enter]
            positive = np.nonzero(col > _PIVOT_TOL)[0]
            if positive.size == 0:
                return "unbounded"
            ratios = self.T[positive, -1] / col[positive]
            best = ratios.min()
            tied = positive[ratios <= best + 1e-12]
            if bland:
                leave = int(tied[np.argmin(self.basis[tied])])
            else:
                leave = int(tied[0])
            if self.pivots_used >= pivot_budget:
                raise LpInstabilityError(
                    f"no convergence within {pivot_budget} pivots; input may be ill-conditioned"
                )
            self.pivots_used += 1
            if best <= 1e-12:
                degenerate_streak += 1
                if degenerate_streak >= _DEGENERATE_STREAK:
                    bland = True
            else:
                degenerate_streak = 0
            self._pivot(leave, enter, obj_row)

    def _pivot(self, row: int, col: int, obj_row: np.ndarray) -> None:
        T = self.T
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        obj_row -= obj_row[col] * T[row]
        self.basis[row] = col

    def _purge_artificials(self, obj_row: np.ndarray) -> None:
        """Pivot leftover artificials out of the basis or drop redundant rows."""
        drop_rows = []
        for i in range(self.T.shape[0]):
            if self.basis[i] not in self.art_cols:
                continue
            row = self.T[i, : self.n_real]
            candidates = np.nonzero(np.abs(row) > 1e-7)[0]
            if candidates.size == 0:
                drop_rows.append(i)
            else:
                self._pivot(i, int(candidates[0]), obj_row)
        if drop_rows:
            keep = np.setdiff1d(np.arange(self.T.shape[0]), drop_rows)
            self.T = self.T[keep]
            self.A0 = self.A0[keep]
            self.b0 = self.b0[keep]
            self.basis = self.basis[keep]
        self.T = np.hstack([self.T[:, : self.n_real], self.T[:, -1:]])
        self.A0 = self.A0[:, : self.n_real]
        self.art_cols = set()

    def solution(self) -> np.ndarray:
        """Basic solution, re-solved against the original coefficients."""
        width = self.A0.shape[1] if self.T.shape[0] else self.n
        y_full = np.zeros(max(width, self.n))
        if self.T.shape[0]:
            values = self.T[:, -1]
            try:
                refined = np.linalg.solve(self.A0[:, self.basis], self.b0)
                if np.all(np.isfinite(refined)) and np.allclose(
                    refined, values, atol=1e-6, rtol=1e-6
                ):
                    values = refined
            except np.linalg.LinAlgError:
                pass
            y_full[self.basis] = np.clip(values, 0.0, None)
        return y_full[: self.n]
