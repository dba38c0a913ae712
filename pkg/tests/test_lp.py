import itertools
import math

import numpy as np
import pytest

from rankopt.lp import EPS_FEAS, LinearProgram, LpInstabilityError, solve_lp


def check_feasible(lp: LinearProgram, x: np.ndarray, tol: float = EPS_FEAS) -> None:
    for coeffs, rel, rhs in lp.rows:
        lhs = float(coeffs @ x)
        if rel == "<=":
            assert lhs <= rhs + tol
        elif rel == ">=":
            assert lhs >= rhs - tol
        else:
            assert lhs == pytest.approx(rhs, abs=tol)
    for value, (lo, hi) in zip(x, lp.bounds):
        assert lo - tol <= value <= hi + tol


def test_single_bound():
    lp = LinearProgram(np.array([1.0]), ((np.array([1.0]), "<=", 1.0),), ((0.0, math.inf),))
    result = solve_lp(lp)
    assert result.status == "optimal"
    assert result.objective == pytest.approx(1.0, abs=1e-9)
    check_feasible(lp, result.x)


def test_fixed_sum():
    lp = LinearProgram(
        np.array([1.0, 1.0]),
        ((np.array([1.0, 1.0]), "=", 10.0),),
        ((0.0, math.inf), (0.0, math.inf)),
    )
    result = solve_lp(lp)
    assert result.status == "optimal"
    assert result.objective == pytest.approx(10.0, abs=1e-9)
    check_feasible(lp, result.x)


def test_forced_contradiction_is_infeasible():
    lp = LinearProgram(
        np.array([0.0, 0.0]),
        (
            (np.array([1.0, 1.0]), "=", 10.0),
            (np.array([-0.1, -0.2]), ">=", 0.0),
        ),
        ((0.0, math.inf), (0.0, math.inf)),
    )
    assert solve_lp(lp).status == "infeasible"


def test_unbounded():
    lp = LinearProgram(np.array([1.0]), (), ((0.0, math.inf),))
    assert solve_lp(lp).status == "unbounded"


def test_shifted_lower_bounds():
    lp = LinearProgram(
        np.array([-1.0, -2.0]),
        ((np.array([1.0, 1.0]), "<=", 10.0),),
        ((2.0, math.inf), (3.0, math.inf)),
    )
    result = solve_lp(lp)
    assert result.status == "optimal"
    np.testing.assert_allclose(result.x, [2.0, 3.0], atol=1e-9)


def test_pivot_budget_raises():
    rng = np.random.default_rng(7)
    rows = tuple((rng.random(6), "<=", 5.0) for _ in range(8))
    lp = LinearProgram(rng.random(6), rows, ((0.0, 10.0),) * 6)
    with pytest.raises(LpInstabilityError):
        solve_lp(lp, pivot_budget=1)


def _enumerate_vertices(lp: LinearProgram):
    """All basic feasible points: intersections of n active constraints."""
    n = lp.objective.size
    planes = []
    for coeffs, rel, rhs in lp.rows:
        planes.append((np.asarray(coeffs, dtype=float), float(rhs)))
    for j, (lo, hi) in enumerate(lp.bounds):
        unit = np.zeros(n)
        unit[j] = 1.0
        planes.append((unit, lo))
        if math.isfinite(hi):
            planes.append((unit, hi))
    vertices = []
    for combo in itertools.combinations(planes, n):
        a = np.array([p[0] for p in combo])
        b = np.array([p[1] for p in combo])
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        ok = True
        for coeffs, rel, rhs in lp.rows:
            lhs = float(coeffs @ x)
            if rel == "<=" and lhs > rhs + 1e-7:
                ok = False
            elif rel == ">=" and lhs < rhs - 1e-7:
                ok = False
            elif rel == "=" and abs(lhs - rhs) > 1e-7:
                ok = False
        for value, (lo, hi) in zip(x, lp.bounds):
            if value < lo - 1e-7 or value > hi + 1e-7:
                ok = False
        if ok:
            vertices.append(x)
    return vertices


@pytest.mark.parametrize("seed", range(40))
def test_against_vertex_enumeration_oracle(seed):
    rng = np.random.default_rng(1234 + seed)
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, 4))
    rows = []
    for _ in range(m):
        coeffs = rng.normal(size=n)
        rel = rng.choice(["<=", ">=", "="])
        rows.append((coeffs, rel, float(rng.normal())))
    bounds = tuple((0.0, float(rng.uniform(0.5, 3.0))) for _ in range(n))
    lp = LinearProgram(rng.normal(size=n), tuple(rows), bounds)
    result = solve_lp(lp)
    vertices = _enumerate_vertices(lp)
    if result.status == "infeasible":
        assert not vertices
        return
    assert result.status == "optimal"  # bounded box: never unbounded
    check_feasible(lp, result.x)
    best = max(float(lp.objective @ v) for v in vertices)
    assert result.objective == pytest.approx(best, abs=1e-7)


@pytest.mark.parametrize("seed", range(25))
def test_every_optimal_solve_is_feasible(seed):
    rng = np.random.default_rng(999 + seed)
    n = int(rng.integers(2, 8))
    m = int(rng.integers(1, 10))
    rows = tuple(
        (rng.normal(size=n), rng.choice(["<=", ">=", "="]), float(rng.normal()))
        for _ in range(m)
    )
    bounds = tuple((0.0, float(rng.uniform(1.0, 5.0))) for _ in range(n))
    lp = LinearProgram(rng.normal(size=n), rows, bounds)
    result = solve_lp(lp)
    if result.status == "optimal":
        check_feasible(lp, result.x)
        assert result.objective == pytest.approx(float(lp.objective @ result.x), abs=1e-9)


def test_deterministic_resolve():
    rng = np.random.default_rng(5)
    rows = tuple((rng.normal(size=4), "<=", float(rng.uniform(1, 3))) for _ in range(5))
    lp = LinearProgram(rng.normal(size=4), rows, ((0.0, 2.0),) * 4)
    first = solve_lp(lp)
    second = solve_lp(lp)
    assert first.status == second.status
    np.testing.assert_array_equal(first.x, second.x)
