"""Rank optimization: big-M MILP encodings solved exactly by branch-and-bound.

Four problems are supported for a chosen target entity: maximize the number
of weakly dominated rivals (first order), maximize the score lead over the
nearest dominated rival at the proven optimal count (second order), each in
continuous or integer weight mode, plus the mirrored worst-rank mode that
maximizes the number of rivals strictly ahead of the target.
"""

from __future__ import annotations

import heapq
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import IndicatorMatrix
from .lp import LinearProgram, solve_lp
from .ranking import WeightVector, composite_scores, dominance_count, equal_weights

DEFAULT_NODE_BUDGET = 10_000_000

#: Strictness margin approximating the open "strictly worse" constraint of
#: the worst-rank mode.
EPS_STRICT = 1e-7

_PRUNE_TOL = 1e-9


def default_node_budget() -> int:
    """Node budget, overridable through the RANKOPT_NODE_BUDGET env var."""
    raw = os.environ.get("RANKOPT_NODE_BUDGET")
    if raw is None:
        return DEFAULT_NODE_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"RANKOPT_NODE_BUDGET must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError("RANKOPT_NODE_BUDGET must be positive")
    return value


@dataclass(frozen=True)
class OptimizationSpec:
    """What to optimize: target entity, order, weight mode, and direction."""

    target: int
    order: str = "first"          # "first" | "second"
    mode: str = "integer"         # "continuous" | "integer"
    direction: str = "best"       # "best" | "worst"
    w_min: float = 0.0            # continuous mode only
    weight_cap: int = 5           # integer mode upper bound per weight
    eps_feas: float = 1e-9
    eps_int: float = 1e-6
    node_budget: int = DEFAULT_NODE_BUDGET
    time_budget: float | None = None

    def __post_init__(self):
        if self.order not in ("first", "second"):
            raise ValueError(f"order must be 'first' or 'second', got {self.order!r}")
        if self.mode not in ("continuous", "integer"):
            raise ValueError(f"mode must be 'continuous' or 'integer', got {self.mode!r}")
        if self.direction not in ("best", "worst"):
            raise ValueError(f"direction must be 'best' or 'worst', got {self.direction!r}")
        if self.w_min < 0:
            raise ValueError("w_min must be non-negative")
        if self.weight_cap < 1:
            raise ValueError("weight_cap must be at least 1")
        if self.node_budget < 1:
            raise ValueError("node_budget must be positive")


@dataclass(frozen=True)
class SolverStats:
    nodes: int
    lp_solves: int
    wall_time: float
    root_bound: float


@dataclass(frozen=True)
class Solution:
    """Optimal count (and distance), a witnessing weight vector, and how it was proved.

    ``z`` has one entry per entity: 1 marks rivals selected by the optimizer,
    with the target's own entry fixed at 0.  For the worst direction,
    ``r_star`` counts rivals strictly ahead of the target instead of rivals
    the target dominates.
    """

    r_star: int
    d_star: float | None
    weights: WeightVector
    z: np.ndarray
    proven: bool
    stats: SolverStats

    def __post_init__(self):
        z = np.asarray(self.z, dtype=int)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def top_rank(self) -> int:
        """Rank implied by the dominance count: C - r_star."""
        return int(self.z.size - self.r_star)


@dataclass(frozen=True)
class BigMData:
    """Per-rival constants large enough to deactivate a relaxed constraint."""

    values: np.ndarray

    @classmethod
    def for_rank(cls, diffs: np.ndarray, mode: str, cap: int) -> "BigMData":
        # Deactivated constraint: sum_q diff * w >= -M; M exceeds the worst
        # achievable violation over the weight box.
        if mode == "continuous":
            values = 10.0 * np.maximum(0.0, np.max(-diffs, axis=1)) + 1.0
        else:
            values = cap * np.maximum(0.0, -diffs).sum(axis=1) + 1.0
        return cls(values)

    @classmethod
    def for_distance(cls, diffs: np.ndarray, mode: str, cap: int, gap_cap: float) -> "BigMData":
        # Same as for_rank but the right-hand side carries the distance
        # variable, so M additionally absorbs its upper bound.
        return cls(BigMData.for_rank(diffs, mode, cap).values + gap_cap)

    @classmethod
    def for_worst(cls, diffs: np.ndarray, mode: str, cap: int) -> "BigMData":
        if mode == "continuous":
            values = 10.0 * np.maximum(0.0, np.max(diffs, axis=1)) + EPS_STRICT + 1.0
        else:
            values = cap * np.maximum(0.0, diffs).sum(axis=1) + EPS_STRICT + 1.0
        return cls(values)


# ---------------------------------------------------------------------------
# Branch-and-bound engine
# ---------------------------------------------------------------------------


@dataclass
class _Milp:
    """Maximize objective over rows + box, with some variables integral."""

    objective: np.ndarray
    rows: tuple
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray   # bool mask
    priority: np.ndarray  # lower value branches first


@dataclass
class _BnbOutcome:
    x: np.ndarray | None
    value: float
    proven: bool
    infeasible: bool
    nodes: int
    lp_solves: int
    root_bound: float


def _row_violation(milp: _Milp, x: np.ndarray) -> float:
    worst = 0.0
    for coeffs, rel, rhs in milp.rows:
        lhs = float(coeffs @ x)
        if rel == "<=":
            worst = max(worst, lhs - rhs)
        elif rel == ">=":
            worst = max(worst, rhs - lhs)
        else:
            worst = max(worst, abs(lhs - rhs))
    return worst


def _branch_and_bound(
    milp: _Milp,
    *,
    integral_objective: bool,
    heuristic=None,
    incumbent_x: np.ndarray | None = None,
    incumbent_value: float = -math.inf,
    eps_int: float = 1e-6,
    node_budget: int = DEFAULT_NODE_BUDGET,
    deadline: float | None = None,
) -> _BnbOutcome:
    lp_solves = 0

    def solve_node(lb, ub):
        nonlocal lp_solves
        lp_solves += 1
        return solve_lp(LinearProgram(milp.objective, milp.rows, tuple(zip(lb, ub))))

    def beats(bound: float, incumbent: float) -> bool:
        if integral_objective:
            return math.floor(bound + 1e-6) > incumbent + _PRUNE_TOL
        return bound > incumbent + _PRUNE_TOL

    root = solve_node(milp.lb, milp.ub)
    if root.status == "infeasible":
        return _BnbOutcome(None, -math.inf, True, True, 1, lp_solves, -math.inf)
    if root.status != "optimal":
        raise RuntimeError(f"relaxation unexpectedly {root.status}")

    best_x, best_val = incumbent_x, incumbent_value
    nodes = 0
    counter = 0
    heap = [(-root.objective, counter, root.x, milp.lb.copy(), milp.ub.copy())]
    proven = True
    int_idx = np.nonzero(milp.integer)[0]

    while heap:
        neg_bound, _, x, lb, ub = heapq.heappop(heap)
        bound = -neg_bound
        if not beats(bound, best_val):
            break  # best-bound order: every remaining node is no better
        nodes += 1
        if nodes > node_budget or (deadline is not None and time.monotonic() > deadline):
            proven = False
            break

        if heuristic is not None:
            candidate = heuristic(x)
            if candidate is not None:
                cand_x, cand_val = candidate
                if cand_val > best_val:
                    best_x, best_val = cand_x, cand_val
                    if not beats(bound, best_val):
                        break

        frac = np.abs(x[int_idx] - np.round(x[int_idx]))
        fractional = int_idx[frac > eps_int]
        if fractional.size == 0:
            x_fix = x.copy()
            x_fix[int_idx] = np.round(x_fix[int_idx])
            if _row_violation(milp, x_fix) <= 1e-7:
                val = float(milp.objective @ x_fix)
                if val > best_val:
                    best_x, best_val = x_fix, val
                continue
            # Rounding broke feasibility: force a branch on the least-exact
            # integer variable to keep the search exact.
            loose = np.nonzero(frac > 1e-12)[0]
            if loose.size == 0:
                continue
            branch_var = int(int_idx[loose[np.argmax(frac[loose])]])
        else:
            frac_part = x[fractional] - np.floor(x[fractional])
            keys = list(
                zip(
                    milp.priority[fractional],
                    np.abs(frac_part - 0.5),
                    fractional,
                )
            )
            branch_var = int(fractional[min(range(len(keys)), key=keys.__getitem__)])

        value = x[branch_var]
        for child_lb_val, child_ub_val in (
            (lb[branch_var], math.floor(value + 1e-9)),
            (math.ceil(value - 1e-9), ub[branch_var]),
        ):
            if child_lb_val > child_ub_val:
                continue
            clb, cub = lb.copy(), ub.copy()
            clb[branch_var] = child_lb_val
            cub[branch_var] = child_ub_val
            if clb[branch_var] == lb[branch_var] and cub[branch_var] == ub[branch_var]:
                continue  # no restriction; avoid infinite loops
            res = solve_node(clb, cub)
            if res.status == "infeasible":
                continue
            child_bound = min(bound, res.objective)
            if not beats(child_bound, best_val):
                continue
            counter += 1
            heapq.heappush(heap, (-child_bound, counter, res.x, clb, cub))

    return _BnbOutcome(best_x, best_val, proven, False, nodes, lp_solves, root.objective)


# ---------------------------------------------------------------------------
# Problem assembly helpers
# ---------------------------------------------------------------------------


def _rival_diffs(data: IndicatorMatrix, target: int) -> tuple[np.ndarray, np.ndarray]:
    rivals = np.array([k for k in range(data.num_entities) if k != target], dtype=int)
    diffs = (data.values[:, target][:, None] - data.values[:, rivals]).T  # (R, Q)
    return rivals, diffs


def _weight_bounds(spec: OptimizationSpec, q: int) -> tuple[np.ndarray, np.ndarray]:
    if spec.mode == "continuous":
        if spec.w_min * q > 10.0 + 1e-12:
            raise ValueError(f"infeasible: w_min={spec.w_min} requires a weight sum above 10")
        return np.full(q, spec.w_min), np.full(q, 10.0)
    return np.zeros(q), np.full(q, float(spec.weight_cap))


def _fallback_weights(spec: OptimizationSpec, q: int) -> WeightVector:
    if spec.mode == "continuous":
        spread = 10.0 - spec.w_min * q
        return WeightVector.continuous(np.full(q, spec.w_min) + spread / q)
    return WeightVector.integer(np.ones(q, dtype=int))

def _round_integer_weights(w: np.ndarray, cap: int) -> np.ndarray:
    rounded = np.clip(np.round(w), 0, cap).astype(float)
    if rounded.sum() < 1:
        rounded[int(np.argmax(w))] = 1.0
    return rounded


def _seed_weight_vectors(data: IndicatorMatrix, spec: OptimizationSpec) -> list[np.ndarray]:
    """Cheap incumbents: top single-dimension concentrations plus equal weights."""
    q = data.num_dimensions
    target = spec.target
    candidates: list[np.ndarray] = []
    scores = []
    for dim in range(q):
        column = data.values[dim]
        better = column[target] >= column
        scores.append((int(better.sum()), -dim))
    top_dims = [-(d) for _, d in sorted(scores, reverse=True)[:3]]
    for dim in top_dims:
        if spec.mode == "continuous":
            w = np.full(q, spec.w_min)
            w[dim] += 10.0 - w.sum()
        else:
            w = np.zeros(q)
            w[dim] = 1.0
        candidates.append(w)
    if spec.mode == "continuous":
        spread = 10.0 - spec.w_min * q
        candidates.append(np.full(q, spec.w_min) + spread / q)
    else:
        candidates.append(np.ones(q))
    return candidates


def _as_weight_vector(spec: OptimizationSpec, w: np.ndarray) -> WeightVector:
    if spec.mode == "continuous":
        w = np.clip(w, spec.w_min, None)
        return WeightVector.continuous(w * (10.0 / w.sum()))
    return WeightVector.integer(w)


def _replay_count(data: IndicatorMatrix, weights: WeightVector, target: int) -> int:
    return dominance_count(data, weights, target)


def _full_z(num_entities: int, rivals: np.ndarray, selected: np.ndarray,
            fixed_one: np.ndarray | None = None) -> np.ndarray:
    z = np.zeros(num_entities, dtype=int)
    z[rivals[selected]] = 1
    if fixed_one is not None:
        z[fixed_one] = 1
    return z


# ---------------------------------------------------------------------------
# First-order rank maximization
# ---------------------------------------------------------------------------


def _solve_rank(data: IndicatorMatrix, spec: OptimizationSpec) -> Solution:
    start = time.monotonic()
    deadline = start + spec.time_budget if spec.time_budget else None
    c = spec.target
    n = data.num_entities
    q = data.num_dimensions
    if not 0 <= c < n:
        raise IndexError(f"target entity {c} out of range")
    rivals, diffs = _rival_diffs(data, c)
    w_lo, w_hi = _weight_bounds(spec, q)
    cap = spec.weight_cap

    # Entrywise screening: rivals the target beats for every weight vector
    # are fixed dominated; rivals ahead in every dimension can never be.
    always = np.all(diffs >= 0, axis=1)
    never = np.all(diffs < 0, axis=1)
    free = np.nonzero(~always & ~never)[0]
    base_count = int(always.sum())

    if free.size == 0:
        weights = _fallback_weights(spec, q)
        r_star = base_count
        if _replay_count(data, weights, c) != r_star:
            raise RuntimeError("entrywise screening disagrees with dominance replay")
        stats = SolverStats(0, 0, time.monotonic() - start, float(base_count))
        return Solution(r_star, None, weights, _full_z(n, rivals, np.array([], dtype=int),
                                                       rivals[always]), True, stats)

    fdiffs = diffs[free]
    big_m = BigMData.for_rank(fdiffs, spec.mode, cap).values
    nfree = free.size
    nvar = q + nfree

    rows = []
    for i in range(nfree):
        coeffs = np.zeros(nvar)
        coeffs[:q] = fdiffs[i]
        coeffs[q + i] = -big_m[i]
        rows.append((coeffs, ">=", -big_m[i]))
    sum_row = np.zeros(nvar)
    sum_row[:q] = 1.0
    if spec.mode == "continuous":
        rows.append((sum_row, "=", 10.0))
    else:
        rows.append((sum_row, ">=", 1.0))

    objective = np.zeros(nvar)
    objective[q:] = 1.0
    lb = np.concatenate([w_lo, np.zeros(nfree)])
    ub = np.concatenate([w_hi, np.ones(nfree)])
    integer = np.zeros(nvar, dtype=bool)
    integer[q:] = True
    if spec.mode == "integer":
        integer[:q] = True
    priority = np.concatenate([np.ones(q, dtype=int), np.zeros(nfree, dtype=int)])
    milp = _Milp(objective, tuple(rows), lb, ub, integer, priority)

    def candidate_from_weights(w_used: np.ndarray):
        margins = fdiffs @ w_used
        selected = margins >= 0.0
        x = np.concatenate([w_used, selected.astype(float)])
        return x, float(selected.sum())

    def heuristic(x_lp: np.ndarray):
        w = x_lp[:q]
        if spec.mode == "integer":
            w = _round_integer_weights(w, cap)
        return candidate_from_weights(w)

    incumbent_x, incumbent_val = None, -math.inf
    for w_seed in _seed_weight_vectors(data, spec):
        x_seed, val_seed = candidate_from_weights(w_seed)
        if val_seed > incumbent_val:
            incumbent_x, incumbent_val = x_seed, val_seed

    outcome = _branch_and_bound(
        milp,
        integral_objective=True,
        heuristic=heuristic,
        incumbent_x=incumbent_x,
        incumbent_value=incumbent_val,
        eps_int=spec.eps_int,
        node_budget=spec.node_budget,
        deadline=deadline,
    )
    if outcome.infeasible or outcome.x is None:
        raise RuntimeError("rank maximization has a trivially feasible point; solver disagreed")

    selected = np.round(outcome.x[q:]).astype(int) == 1
    if spec.mode == "integer":
        w_final = np.round(outcome.x[:q])
    else:
        w_final = _polish_rank_continuous(outcome.x, fdiffs, selected, spec, q)
    weights = _as_weight_vector(spec, w_final)
    r_star = base_count + int(selected.sum())
    replayed = _replay_count(data, weights, c)
    if replayed != r_star:
        raise RuntimeError(
            f"solver inconsistency: dominance replay gives {replayed}, solver claims {r_star}"
        )
    z = _full_z(n, rivals[free], np.nonzero(selected)[0], rivals[always])
    stats = SolverStats(outcome.nodes, outcome.lp_solves, time.monotonic() - start,
                        base_count + outcome.root_bound)
    return Solution(r_star, None, weights, z, outcome.proven, stats)


def _polish_rank_continuous(x: np.ndarray, fdiffs: np.ndarray, selected: np.ndarray,
                            spec: OptimizationSpec, q: int) -> np.ndarray:
    """Re-solve the continuous weights with the rival selection fixed.

    Maximizing the total margin of the selected rivals pushes the witness
    strictly inside the dominance region wherever the geometry allows.
    """
    if not selected.any():
        return x[:q]
    rows = [(fdiffs[i], ">=", 0.0) for i in np.nonzero(selected)[0]]
    rows.append((np.ones(q), "=", 10.0))
    objective = fdiffs[selected].sum(axis=0)
    bounds = tuple((spec.w_min, 10.0) for _ in range(q))
    res = solve_lp(LinearProgram(objective, tuple(rows), bounds))
    if res.status != "optimal":
        return x[:q]
    return res.x


def maximize_rank_continuous(data: IndicatorMatrix, spec: OptimizationSpec) -> Solution:
    """Most rivals the target can weakly dominate with free non-negative weights."""
    if spec.mode != "continuous":
        raise ValueError("spec.mode must be 'continuous'")
    return _solve_rank(data, spec)


def maximize_rank_integer(data: IndicatorMatrix, spec: OptimizationSpec) -> Solution:
    """Most rivals the target can weakly dominate with integer weights 0..cap."""
    if spec.mode != "integer":
        raise ValueError("spec.mode must be 'integer'")
    return _solve_rank(data, spec)


# ---------------------------------------------------------------------------
# Second-order distance maximization
# ---------------------------------------------------------------------------


def maximize_distance_continuous(
    data: IndicatorMatrix,
    spec: OptimizationSpec,
    r_star: int,
    warm_weights: WeightVector | None = None,
) -> Solution:
    """Largest lead over the nearest dominated rival, at the proven count r_star."""
    if spec.mode != "continuous":
        raise ValueError("spec.mode must be 'continuous'")
    start = time.monotonic()
    deadline = start + spec.time_budget if spec.time_budget else None
    c = spec.target
    n, q = data.num_entities, data.num_dimensions
    rivals, diffs = _rival_diffs(data, c)
    w_lo, w_hi = _weight_bounds(spec, q)
    if not 0 <= r_star <= n - 1:
        raise ValueError(f"r_star={r_star} out of range for {n} entities")
    if r_star == 0:
        weights = _fallback_weights(spec, q)
        stats = SolverStats(0, 0, time.monotonic() - start, 0.0)
        return Solution(0, 0.0, weights, np.zeros(n, dtype=int), True, stats)

    never = np.all(diffs < 0, axis=1)
    free = np.nonzero(~never)[0]
    if free.size < r_star:
        raise ValueError(f"r_star={r_star} exceeds the {free.size} rivals the target can dominate")
    fdiffs = diffs[free]
    nfree = free.size
    big_m = BigMData.for_distance(fdiffs, "continuous", spec.weight_cap, 10.0).values
    nvar = q + nfree + 1  # weights, z, distance

    rows = []
    for i in range(nfree):
        coeffs = np.zeros(nvar)
        coeffs[:q] = fdiffs[i]
        coeffs[q + i] = -big_m[i]
        coeffs[-1] = -1.0
        rows.append((coeffs, ">=", -big_m[i]))
    sum_w = np.zeros(nvar)
    sum_w[:q] = 1.0
    rows.append((sum_w, "=", 10.0))
    sum_z = np.zeros(nvar)
    sum_z[q:-1] = 1.0
    rows.append((sum_z, "=", float(r_star)))

    objective = np.zeros(nvar)
    objective[-1] = 1.0
    lb = np.concatenate([w_lo, np.zeros(nfree), [0.0]])
    ub = np.concatenate([w_hi, np.ones(nfree), [10.0]])
    integer = np.zeros(nvar, dtype=bool)
    integer[q:-1] = True
    priority = np.zeros(nvar, dtype=int)
    milp = _Milp(objective, tuple(rows), lb, ub, integer, priority)

    def candidate_from_weights(w: np.ndarray):
        margins = fdiffs @ w
        if int((margins >= 0.0).sum()) < r_star:
            return None
        order = np.lexsort((np.arange(nfree), -margins))[:r_star]
        d = float(margins[order].min())
        if d < 0.0:
            return None
        zvals = np.zeros(nfree)
        zvals[order] = 1.0
        return np.concatenate([w, zvals, [d]]), d

    def heuristic(x_lp: np.ndarray):
        return candidate_from_weights(x_lp[:q])

    incumbent_x, incumbent_val = None, -math.inf
    if warm_weights is not None:
        seeded = candidate_from_weights(np.asarray(warm_weights.normalized, dtype=float))
        if seeded is not None:
            incumbent_x, incumbent_val = seeded

    outcome = _branch_and_bound(
        milp,
        integral_objective=False,
        heuristic=heuristic,
        incumbent_x=incumbent_x,
        incumbent_value=incumbent_val,
        eps_int=spec.eps_int,
        node_budget=spec.node_budget,
        deadline=deadline,
    )
    if outcome.infeasible:
        raise ValueError(f"r_star={r_star} is not achievable on this dataset (stale input?)")
    if outcome.x is None:
        raise RuntimeError("no feasible selection found although r_star is achievable")

    selected = np.round(outcome.x[q:-1]).astype(int) == 1
    w_final, d_final = _polish_distance_continuous(outcome.x, fdiffs, selected, spec, q)
    weights = _as_weight_vector(spec, w_final)
    margins = fdiffs[selected] @ np.asarray(weights.normalized)
    d_star = max(0.0, float(margins.min())) if selected.any() else 0.0
    replayed = _replay_count(data, weights, c)
    if replayed != r_star:
        raise RuntimeError(
            f"distance witness replays a dominance count of {replayed}, expected {r_star}"
        )
    z = _full_z(n, rivals[free], np.nonzero(selected)[0])
    stats = SolverStats(outcome.nodes, outcome.lp_solves, time.monotonic() - start,
                        outcome.root_bound)
    return Solution(r_star, d_star, weights, z, outcome.proven, stats)


def _polish_distance_continuous(x, fdiffs, selected, spec, q):
    sel_rows = np.nonzero(selected)[0]
    nvar = q + 1
    rows = []
    for i in sel_rows:
        coeffs = np.zeros(nvar)
        coeffs[:q] = fdiffs[i]
        coeffs[-1] = -1.0
        rows.append((coeffs, ">=", 0.0))
    sum_w = np.zeros(nvar)
    sum_w[:q] = 1.0
    rows.append((sum_w, "=", 10.0))
    objective = np.zeros(nvar)
    objective[-1] = 1.0
    bounds = tuple((spec.w_min, 10.0) for _ in range(q)) + ((0.0, 10.0),)
    res = solve_lp(LinearProgram(objective, tuple(rows), bounds))
    if res.status != "optimal":
        return x[:q], float(x[-1])
    return res.x[:q], float(res.x[-1])


def maximize_distance_integer(
    data: IndicatorMatrix,
    spec: OptimizationSpec,
    r_star: int,
    warm_weights: WeightVector | None = None,
) -> Solution:
    """Second-order problem over integer weights, exact via weight-sum enumeration.

    The normalized distance couples d with sum(w); fixing S = sum(w) and
    substituting t = d * S / 10 linearizes each subproblem exactly, so the
    optimum is the best d over S = 1 .. cap*Q.
    """
    if spec.mode != "integer":
        raise ValueError("spec.mode must be 'integer'")
    start = time.monotonic()
    deadline = start + spec.time_budget if spec.time_budget else None
    c = spec.target
    n, q = data.num_entities, data.num_dimensions
    cap = spec.weight_cap
    rivals, diffs = _rival_diffs(data, c)
    if not 0 <= r_star <= n - 1:
        raise ValueError(f"r_star={r_star} out of range for {n} entities")
    if r_star == 0:
        weights = _fallback_weights(spec, q)
        stats = SolverStats(0, 0, time.monotonic() - start, 0.0)
        return Solution(0, 0.0, weights, np.zeros(n, dtype=int), True, stats)

    never = np.all(diffs < 0, axis=1)
    free = np.nonzero(~never)[0]
    if free.size < r_star:
        raise ValueError(f"r_star={r_star} exceeds the {free.size} rivals the target can dominate")
    fdiffs = diffs[free]
    nfree = free.size
    nvar = q + nfree + 1  # weights, z, t = d * S / 10

    def candidate_for_sum(w: np.ndarray, total: int):
        margins = fdiffs @ w
        if int((margins >= 0.0).sum()) < r_star:
            return None
        order = np.lexsort((np.arange(nfree), -margins))[:r_star]
        t = float(margins[order].min())
        if t < 0.0:
            return None
        zvals = np.zeros(nfree)
        zvals[order] = 1.0
        return np.concatenate([w, zvals, [t]]), t, 10.0 * t / total

    best: tuple[np.ndarray, np.ndarray, float] | None = None  # (w, z, d)
    best_d = -math.inf
    if warm_weights is not None:
        w0 = np.asarray(warm_weights.raw, dtype=float)
        seeded = candidate_for_sum(w0, int(w0.sum()))
        if seeded is not None:
            x0, _, d0 = seeded
            best = (x0[:q], x0[q:-1], d0)
            best_d = d0

    total_nodes = total_lps = 0
    proven = True
    feasible_any = best is not None
    root_bound = -math.inf

    for total in range(1, cap * q + 1):
        big_m = BigMData.for_distance(fdiffs, "integer", cap, float(total)).values
        rows = []
        for i in range(nfree):
            coeffs = np.zeros(nvar)
            coeffs[:q] = fdiffs[i]
            coeffs[q + i] = -big_m[i]
            coeffs[-1] = -1.0
            rows.append((coeffs, ">=", -big_m[i]))
        sum_w = np.zeros(nvar)
        sum_w[:q] = 1.0
        rows.append((sum_w, "=", float(total)))
        sum_z = np.zeros(nvar)
        sum_z[q:-1] = 1.0
        rows.append((sum_z, "=", float(r_star)))
        objective = np.zeros(nvar)
        objective[-1] = 1.0
        lb = np.concatenate([np.zeros(q), np.zeros(nfree), [0.0]])
        ub = np.concatenate([np.full(q, float(cap)), np.ones(nfree), [float(total)]])
        integer = np.zeros(nvar, dtype=bool)
        integer[:-1] = True
        priority = np.concatenate([np.ones(q, dtype=int), np.zeros(nfree, dtype=int), [2]])
        milp = _Milp(objective, tuple(rows), lb, ub, integer, priority)

        def heuristic(x_lp: np.ndarray, _total=total):
            w = _round_integer_weights(x_lp[:q], cap)
            if int(w.sum()) != _total:
                return None
            cand = candidate_for_sum(w, _total)
            if cand is None:
                return None
            x_cand, t, _ = cand
            return x_cand, t

        threshold = best_d * total / 10.0 if best_d > -math.inf else -math.inf
        outcome = _branch_and_bound(
            milp,
            integral_objective=False,
            heuristic=heuristic,
            incumbent_x=None,
            incumbent_value=threshold,
            eps_int=spec.eps_int,
            node_budget=max(1, spec.node_budget - total_nodes),
            deadline=deadline,
        )
        total_nodes += outcome.nodes
        total_lps += outcome.lp_solves
        proven = proven and outcome.proven
        if outcome.root_bound > -math.inf:
            root_bound = max(root_bound, 10.0 * outcome.root_bound / total)
        if outcome.infeasible:
            continue
        feasible_any = feasible_any or outcome.x is not None
        if outcome.x is None:
            continue
        w_cand = np.round(outcome.x[:q])
        z_cand = np.round(outcome.x[q:-1])
        margins = (fdiffs @ w_cand)[z_cand == 1]
        d_cand = 10.0 * float(margins.min()) / float(w_cand.sum()) if margins.size else 0.0
        if d_cand > best_d:
            best_d = d_cand
            best = (w_cand, z_cand, d_cand)

    if best is None:
        if not feasible_any:
            raise ValueError(f"r_star={r_star} is not achievable on this dataset (stale input?)")
        raise RuntimeError("no second-order witness found although r_star is achievable")

    w_final, z_final, d_star = best
    weights = WeightVector.integer(w_final)
    replayed = _replay_count(data, weights, c)
    if replayed != r_star:
        raise RuntimeError(
            f"distance witness replays a dominance count of {replayed}, expected {r_star}"
        )
    z = _full_z(n, rivals[free], np.nonzero(z_final == 1)[0])
    stats = SolverStats(total_nodes, total_lps, time.monotonic() - start, root_bound)
    return Solution(r_star, max(0.0, d_star), weights, z, proven, stats)


# ---------------------------------------------------------------------------
# Worst-rank mode
# ---------------------------------------------------------------------------


def minimize_rank(data: IndicatorMatrix, spec: OptimizationSpec) -> Solution:
    """Most rivals that can be pushed strictly ahead of the target.

    Strictness uses the margin EPS_STRICT on the normalized scores; the
    returned r_star counts rivals strictly above the target, so the implied
    worst rank is r_star + 1.
    """
    if spec.direction != "worst":
        raise ValueError("spec.direction must be 'worst'")
    if spec.order == "second":
        raise ValueError("the worst direction defines no second-order problem")
    start = time.monotonic()
    deadline = start + spec.time_budget if spec.time_budget else None
    c = spec.target
    n, q = data.num_entities, data.num_dimensions
    if not 0 <= c < n:
        raise IndexError(f"target entity {c} out of range")
    cap = spec.weight_cap
    rivals, diffs = _rival_diffs(data, c)
    w_lo, w_hi = _weight_bounds(spec, q)

    always = np.max(diffs, axis=1) <= -EPS_STRICT  # ahead regardless of weights
    never = np.min(diffs, axis=1) >= 0.0           # can never get ahead
    free = np.nonzero(~always & ~never)[0]
    base_count = int(always.sum())

    if free.size == 0:
        weights = _fallback_weights(spec, q)
        stats = SolverStats(0, 0, time.monotonic() - start, float(base_count))
        return Solution(base_count, None, weights,
                        _full_z(n, rivals, np.array([], dtype=int), rivals[always]), True, stats)

    fdiffs = diffs[free]
    big_m = BigMData.for_worst(fdiffs, spec.mode, cap).values
    nfree = free.size
    nvar = q + nfree

    rows = []
    for i in range(nfree):
        coeffs = np.zeros(nvar)
        coeffs[:q] = fdiffs[i]
        coeffs[q + i] = big_m[i]
        rows.append((coeffs, "<=", big_m[i] - EPS_STRICT))
    sum_row = np.zeros(nvar)
    sum_row[:q] = 1.0
    if spec.mode == "continuous":
        rows.append((sum_row, "=", 10.0))
    else:
        rows.append((sum_row, ">=", 1.0))

    objective = np.zeros(nvar)
    objective[q:] = 1.0
    lb = np.concatenate([w_lo, np.zeros(nfree)])
    ub = np.concatenate([w_hi, np.ones(nfree)])
    integer = np.zeros(nvar, dtype=bool)
    integer[q:] = True
    if spec.mode == "integer":
        integer[:q] = True
    priority = np.concatenate([np.ones(q, dtype=int), np.zeros(nfree, dtype=int)])
    milp = _Milp(objective, tuple(rows), lb, ub, integer, priority)

    def candidate_from_weights(w_used: np.ndarray):
        margins = fdiffs @ w_used
        selected = margins <= -EPS_STRICT
        x = np.concatenate([w_used, selected.astype(float)])
        return x, float(selected.sum())

    def heuristic(x_lp: np.ndarray):
        w = x_lp[:q]
        if spec.mode == "integer":
            w = _round_integer_weights(w, cap)
        return candidate_from_weights(w)

    incumbent_x, incumbent_val = None, -math.inf
    for w_seed in _seed_weight_vectors(data, spec):
        x_seed, val_seed = candidate_from_weights(w_seed)
        if val_seed > incumbent_val:
            incumbent_x, incumbent_val = x_seed, val_seed

    outcome = _branch_and_bound(
        milp,
        integral_objective=True,
        heuristic=heuristic,
        incumbent_x=incumbent_x,
        incumbent_value=incumbent_val,
        eps_int=spec.eps_int,
        node_budget=spec.node_budget,
        deadline=deadline,
    )
    if outcome.infeasible or outcome.x is None:
        raise RuntimeError("worst-rank search has a trivially feasible point; solver disagreed")

    selected = np.round(outcome.x[q:]).astype(int) == 1
    if spec.mode == "integer":
        w_final = np.round(outcome.x[:q])
    else:
        w_final = _polish_worst_continuous(outcome.x, fdiffs, selected, spec, q)
    weights = _as_weight_vector(spec, w_final)
    r_star = base_count + int(selected.sum())
    margins = fdiffs[selected] @ np.asarray(weights.normalized)
    if margins.size and margins.max() > -EPS_STRICT + 1e-9:
        raise RuntimeError("worst-rank witness fails the strictness margin on replay")
    z = _full_z(n, rivals[free], np.nonzero(selected)[0], rivals[always])
    stats = SolverStats(outcome.nodes, outcome.lp_solves, time.monotonic() - start,
                        base_count + outcome.root_bound)
    return Solution(r_star, None, weights, z, outcome.proven, stats)


def _polish_worst_continuous(x, fdiffs, selected, spec, q):
    if not selected.any():
        return x[:q]
    rows = [(fdiffs[i], "<=", -EPS_STRICT) for i in np.nonzero(selected)[0]]
    rows.append((np.ones(q), "=", 10.0))
    objective = -fdiffs[selected].sum(axis=0)
    bounds = tuple((spec.w_min, 10.0) for _ in range(q))
    res = solve_lp(LinearProgram(objective, tuple(rows), bounds))
    if res.status != "optimal":
        return x[:q]
    return res.x


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def optimize(data: IndicatorMatrix, spec: OptimizationSpec) -> Solution:
    """Run the problem selected by the spec, chaining first order into second."""
    if spec.direction == "worst":
        return minimize_rank(data, spec)
    if spec.mode == "continuous":
        first = maximize_rank_continuous(data, replace(spec, order="first"))
        if spec.order == "first":
            return first
        second = maximize_distance_continuous(data, spec, first.r_star,
                                              warm_weights=first.weights)
    else:
        first = maximize_rank_integer(data, replace(spec, order="first"))
        if spec.order == "first":
            return first
        second = maximize_distance_integer(data, spec, first.r_star,
                                           warm_weights=first.weights)
    if not first.proven:
        second = replace(second, proven=False)
    return second


@dataclass(frozen=True)
class EntityOutcome:
    entity: int
    entity_name: str
    solution: Solution | None
    error: str | None


def _solve_entity(data: IndicatorMatrix, spec: OptimizationSpec, entity: int) -> EntityOutcome:
    try:
        solution = optimize(data, replace(spec, target=entity, order="second"))
        return EntityOutcome(entity, data.entity_names[entity], solution, None)
    except Exception as exc:  # aggregate per-entity failures without aborting
        return EntityOutcome(entity, data.entity_names[entity], None, str(exc))


def solve_all(data: IndicatorMatrix, spec: OptimizationSpec, workers: int = 1) -> list[EntityOutcome]:
    """First- and second-order solves for every entity, sorted like a results table.

    Rows are ordered by (top rank ascending, distance descending); failed
    entities sort last.  Entities are independent, so they may be dispatched
    to a process pool; output order does not depend on completion order.
    """
    if spec.direction != "best":
        raise ValueError("batch solves support only the best direction")
    entities = list(range(data.num_entities))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_solve_entity, [data] * len(entities),
                                     [spec] * len(entities), entities))
    else:
        outcomes = [_solve_entity(data, spec, c) for c in entities]

    def sort_key(outcome: EntityOutcome):
        if outcome.solution is None:
            return (1, 0, 0.0, outcome.entity)
        sol = outcome.solution
        return (0, sol.top_rank, -(sol.d_star or 0.0), outcome.entity)

    return sorted(outcomes, key=sort_key)
