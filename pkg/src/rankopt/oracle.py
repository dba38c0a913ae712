"""Brute-force reference solvers for validating the optimizer on small inputs.

Everything here works by plain enumeration (plus LP feasibility checks for
the continuous subset oracle) and shares no branch-and-bound machinery with
the optimizer, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dataset import IndicatorMatrix
from .lp import LinearProgram, solve_lp

ENUMERATION_BUDGET = 10_000_000
SUBSET_ENTITY_LIMIT = 12


class OracleBudgetError(ValueError):
    """The instance is too large to enumerate exhaustively."""


@dataclass(frozen=True)
class OracleResult:
    r_star: int
    d_star: float | None
    argmax_weights: tuple[tuple[float, ...], ...]


_ARGMAX_LIMIT = 128
_CHUNK = 65_536


def _weight_chunks(cap: int, q: int):
    """Yield the vectors of {0..cap}^Q in lexicographic (counting) order."""
    base = cap + 1
    total = base**q
    powers = base ** np.arange(q - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield ((idx[:, None] // powers) % base).astype(float)


def brute_integer(
    data: IndicatorMatrix,
    target: int,
    weight_cap: int,
    order: str = "second",
    direction: str = "best",
) -> OracleResult:
    """Enumerate every integer weight vector in {0..cap}^Q with sum >= 1.

    Best direction counts weakly dominated rivals; among count-maximal
    vectors the second order maximizes the smallest normalized margin over
    the dominated rivals.  Worst direction counts rivals strictly ahead.
    At most 128 argmax vectors are retained (lexicographically first).
    """
    q = data.num_dimensions
    if (weight_cap + 1) ** q > ENUMERATION_BUDGET:
        raise OracleBudgetError(
            f"{(weight_cap + 1) ** q} weight vectors exceed the enumeration budget"
        )
    if order not in ("first", "second"):
        raise ValueError(f"order must be 'first' or 'second', got {order!r}")
    if direction not in ("best", "worst"):
        raise ValueError(f"direction must be 'best' or 'worst', got {direction!r}")

    rivals = np.array([k for k in range(data.num_entities) if k != target])
    diffs = data.values[:, [target]] - data.values[:, rivals]  # (Q, R)

    r_star = -1
    d_star = -math.inf
    argmax: list[tuple[float, ...]] = []
    for chunk in _weight_chunks(weight_cap, q):
        totals = chunk.sum(axis=1)
        chunk = chunk[totals >= 1]
        totals = totals[totals >= 1]
        if chunk.size == 0:
            continue
        margins = chunk @ diffs  # (B, R)
        if direction == "worst":
            counts = (margins < 0.0).sum(axis=1)
        else:
            counts = (margins >= 0.0).sum(axis=1)
        best_here = int(counts.max())
        if best_here > r_star:
            r_star, d_star, argmax = best_here, -math.inf, []
        if best_here < r_star:
            continue
        winner_rows = np.nonzero(counts == r_star)[0]
        if direction == "worst" or order == "first" or r_star == 0:
            for row in winner_rows[: max(0, _ARGMAX_LIMIT - len(argmax))]:
                argmax.append(tuple(float(v) for v in chunk[row]))
            continue
        normalized = margins[winner_rows] * (10.0 / totals[winner_rows])[:, None]
        leads = np.where(margins[winner_rows] >= 0.0, normalized, np.inf).min(axis=1)
        chunk_best = float(leads.max())
        if chunk_best > d_star + 1e-12:
            d_star, argmax = chunk_best, []
        ties = winner_rows[leads >= d_star - 1e-12]
        for row in ties[: max(0, _ARGMAX_LIMIT - len(argmax))]:
            argmax.append(tuple(float(v) for v in chunk[row]))

    if direction == "worst" or order == "first":
        return OracleResult(r_star, None, tuple(argmax))
    if r_star == 0:
        return OracleResult(0, 0.0, tuple(argmax))
    return OracleResult(r_star, float(d_star), tuple(argmax))


def brute_continuous_rank(data: IndicatorMatrix, target: int) -> OracleResult:
    """Max weakly dominated rival count over the continuous weight simplex.

    Checks every rival subset for LP feasibility of dominating all of it
    simultaneously; the optimum is the largest feasible subset size.
    """
    n, q = data.num_entities, data.num_dimensions
    if n > SUBSET_ENTITY_LIMIT:
        raise OracleBudgetError(f"{n} entities exceed the {SUBSET_ENTITY_LIMIT}-entity subset budget")
    rivals = [k for k in range(n) if k != target]
    diffs = {k: data.values[:, target] - data.values[:, k] for k in rivals}
    bounds = tuple((0.0, 10.0) for _ in range(q))
    sum_row = (np.ones(q), "=", 10.0)
    for size in range(len(rivals), -1, -1):
        for subset in itertools.combinations(rivals, size):
            rows = [sum_row] + [(diffs[k], ">=", 0.0) for k in subset]
            result = solve_lp(LinearProgram(np.zeros(q), tuple(rows), bounds))
            if result.status == "optimal":
                return OracleResult(size, None, (tuple(float(v) for v in result.x),))
    raise RuntimeError("the empty rival subset must be feasible")  # pragma: no cover


def brute_continuous_distance(data: IndicatorMatrix, target: int, r_star: int) -> OracleResult:
    """Exact continuous second-order optimum by enumerating rival selections.

    For every subset of exactly r_star rivals, the best common lead is a
    plain LP; the optimum is the best lead over all subsets.
    """
    n, q = data.num_entities, data.num_dimensions
    if n > SUBSET_ENTITY_LIMIT:
        raise OracleBudgetError(f"{n} entities exceed the {SUBSET_ENTITY_LIMIT}-entity subset budget")
    rivals = [k for k in range(n) if k != target]
    if r_star == 0:
        return OracleResult(0, 0.0, ())
    if r_star > len(rivals):
        raise ValueError(f"r_star={r_star} exceeds the number of rivals")
    diffs = {k: data.values[:, target] - data.values[:, k] for k in rivals}
    bounds = tuple((0.0, 10.0) for _ in range(q)) + ((0.0, 10.0),)
    objective = np.zeros(q + 1)
    objective[-1] = 1.0
    sum_row = np.zeros(q + 1)
    sum_row[:q] = 1.0
    best_d = -math.inf
    best_w: tuple[float, ...] | None = None
    for subset in itertools.combinations(rivals, r_star):
        rows = [(sum_row, "=", 10.0)]
        for k in subset:
            coeffs = np.zeros(q + 1)
            coeffs[:q] = diffs[k]
            coeffs[-1] = -1.0
            rows.append((coeffs, ">=", 0.0))
        result = solve_lp(LinearProgram(objective, tuple(rows), bounds))
        if result.status == "optimal" and result.objective > best_d:
            best_d = result.objective
            best_w = tuple(float(v) for v in result.x[:q])
    if best_w is None:
        raise ValueError(f"no weight vector dominates any {r_star} rivals (stale r_star?)")
    return OracleResult(r_star, float(best_d), (best_w,))


def _freeze(vectors: np.ndarray) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in row) for row in vectors)
