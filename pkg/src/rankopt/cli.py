"""Command-line front end: rank, optimize, table, verify, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import DatasetError, IndicatorMatrix, embedded_fixture_2014, parse_csv
from .optimizer import (
    OptimizationSpec,
    Solution,
    default_node_budget,
    optimize,
    solve_all,
)
from .oracle import (
    OracleBudgetError,
    brute_integer,
)
from .ranking import WeightError, WeightVector, equal_weights, ranking_table

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_UNPROVEN = 3

_ORDER_ALIASES = {"1": "first", "2": "second", "first": "first", "second": "second"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, WeightError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankopt",
        description="Composite-indicator rankings and rank-optimal weight search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, entity=False):
        p.add_argument("--data", metavar="FILE", default=None,
                       help="CSV or JSON dataset (default: embedded 2014 subset)")
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        if entity:
            p.add_argument("--entity", required=False, help="target entity name")

    p_rank = sub.add_parser("rank", help="rank all entities under a weight vector")
    add_common(p_rank)
    p_rank.add_argument("--mode", choices=("continuous", "integer"), default="integer")
    p_rank.add_argument("weights", nargs="+", type=float, metavar="W")
    p_rank.set_defaults(func=cmd_rank)

    p_opt = sub.add_parser("optimize", help="find rank-optimal weights for one entity")
    add_common(p_opt, entity=True)
    p_opt.add_argument("--mode", choices=("continuous", "integer"), default="integer")
    p_opt.add_argument("--order", choices=tuple(_ORDER_ALIASES), default="2")
    p_opt.add_argument("--direction", choices=("best", "worst"), default="best")
    p_opt.add_argument("--wmin", type=float, default=0.0,
                       help="minimal weight per dimension (continuous mode)")
    p_opt.set_defaults(func=cmd_optimize)

    p_table = sub.add_parser("table", help="rank-optimal weights for every entity")
    add_common(p_table)
    p_table.add_argument("--mode", choices=("continuous", "integer"), default="integer")
    p_table.add_argument("--wmin", type=float, default=0.0)
    p_table.add_argument("--workers", type=int, default=1)
    p_table.set_defaults(func=cmd_table)

    p_verify = sub.add_parser("verify", help="cross-check the solver against brute force")
    add_common(p_verify, entity=True)
    p_verify.add_argument("--cap", type=int, default=3, help="integer weight cap for enumeration")
    p_verify.add_argument("--seed", type=int, default=None,
                          help="verify on a seeded synthetic instance instead of --data")
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="start the JSON-over-HTTP service")
    p_serve.add_argument("--data", metavar="FILE", default=None)
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def load_data(path: str | None) -> IndicatorMatrix:
    if path is None:
        return embedded_fixture_2014()
    text = Path(path).read_text()
    if not text.strip():
        raise DatasetError(f"dataset file {path} is empty")
    if text.lstrip().startswith("{"):
        return IndicatorMatrix.from_json_dict(json.loads(text))
    return parse_csv(text)


def _make_weights(mode: str, values: list[float], q: int) -> WeightVector:
    if len(values) != q:
        raise WeightError(f"expected {q} weights, got {len(values)}")
    if mode == "integer":
        return WeightVector.integer(values)
    return WeightVector.continuous(values)


def _equal_ranks(data: IndicatorMatrix) -> np.ndarray:
    return ranking_table(data, equal_weights(data.num_dimensions)).rank


def cmd_rank(args) -> int:
    data = load_data(args.data)
    weights = _make_weights(args.mode, args.weights, data.num_dimensions)
    table = ranking_table(data, weights)
    eq_rank = _equal_ranks(data)
    rows = [
        {
            "rank": rank,
            "entity": entity,
            "ci": round(ci, 2),
            "equalWeightsRank": int(eq_rank[data.entity_index(entity)]),
        }
        for rank, entity, ci, _ in table.rows()
    ]
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    elif args.format == "csv":
        print("rank,entity,ci,eq_rank")
        for row in rows:
            print(f"{row['rank']},{_csv_cell(row['entity'])},{row['ci']:.2f},{row['equalWeightsRank']}")
    else:
        print(f"{'rank':>4}  {'entity':<20} {'CI':>6}  {'eq.w. rank':>10}")
        for row in rows:
            print(f"{row['rank']:>4}  {row['entity']:<20} {row['ci']:>6.2f}  {row['equalWeightsRank']:>10}")
    return EXIT_OK


def _solution_payload(data: IndicatorMatrix, entity: str, solution: Solution) -> dict:
    weights = solution.weights.raw
    named = {
        data.dimension_names[i]: (int(v) if solution.weights.mode == "integer" else round(v, 6))
        for i, v in enumerate(weights)
        if v > 0
    }
    payload = {
        "entity": entity,
        "topRank": solution.top_rank,
        "rStar": solution.r_star,
        "distance": None if solution.d_star is None else float(solution.d_star),
        "weights": [int(v) if solution.weights.mode == "integer" else float(v) for v in weights],
        "nonzeroWeights": named,
        "proven": solution.proven,
        "stats": {"nodes": solution.stats.nodes, "lpSolves": solution.stats.lp_solves},
    }
    return payload


def cmd_optimize(args) -> int:
    data = load_data(args.data)
    if not args.entity:
        raise ValueError("--entity is required for optimize")
    try:
        target = data.entity_index(args.entity)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    spec = OptimizationSpec(
        target=target,
        order=_ORDER_ALIASES[args.order],
        mode=args.mode,
        direction=args.direction,
        w_min=args.wmin,
        node_budget=default_node_budget(),
    )
    solution = optimize(data, spec)
    payload = _solution_payload(data, data.entity_names[target], solution)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        print("entity,top_rank,distance,proven,weights")
        dist = "" if payload["distance"] is None else f"{payload['distance']:.3f}"
        wtxt = " ".join(str(v) for v in payload["weights"])
        print(f"{_csv_cell(payload['entity'])},{payload['topRank']},{dist},{payload['proven']},{wtxt}")
    else:
        label = "worst rank" if args.direction == "worst" else "top rank"
        shown_rank = solution.r_star + 1 if args.direction == "worst" else solution.top_rank
        print(f"entity:    {payload['entity']}")
        print(f"{label}:  {shown_rank}")
        if payload["distance"] is not None:
            print(f"distance:  {payload['distance']:.3f}")
        print(f"weights:   {' '.join(str(v) for v in payload['weights'])}")
        if payload["nonzeroWeights"]:
            named = ", ".join(f"{k}={v}" for k, v in payload["nonzeroWeights"].items())
            print(f"           ({named})")
        print(f"proven:    {payload['proven']}")
        print(f"stats:     {payload['stats']['nodes']} nodes, {payload['stats']['lpSolves']} LP solves")
    return EXIT_OK if solution.proven else EXIT_UNPROVEN


def cmd_table(args) -> int:
    data = load_data(args.data)
    spec = OptimizationSpec(
        target=0,
        mode=args.mode,
        w_min=args.wmin,
        node_budget=default_node_budget(),
    )
    outcomes = solve_all(data, spec, workers=args.workers)
    eq_rank = _equal_ranks(data)
    rows = []
    failed = False
    for outcome in outcomes:
        if outcome.solution is None:
            failed = True
            rows.append({"entity": outcome.entity_name, "error": outcome.error})
            continue
        sol = outcome.solution
        rows.append(
            {
                "entity": outcome.entity_name,
                "topRank": sol.top_rank,
                "distance": float(sol.d_star or 0.0),
                "equalWeightsRank": int(eq_rank[outcome.entity]),
                "weights": [int(v) if sol.weights.mode == "integer" else float(v)
                            for v in sol.weights.raw],
                "proven": sol.proven,
            }
        )
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    elif args.format == "csv":
        # full-precision distance so the CSV parses back to the in-memory results
        print("entity,top_rank,distance,eq_rank,proven,weights")
        for row in rows:
            if "error" in row:
                print(f"{_csv_cell(row['entity'])},ERROR,,,,{_csv_cell(row['error'])}")
            else:
                wtxt = " ".join(str(v) for v in row["weights"])
                print(
                    f"{_csv_cell(row['entity'])},{row['topRank']},{row['distance']!r},"
                    f"{row['equalWeightsRank']},{row['proven']},{wtxt}"
                )
    else:
        print(f"{'entity':<20} {'top rank':>8} {'distance':>9} {'eq.w. rank':>10}  weights")
        for row in rows:
            if "error" in row:
                print(f"{row['entity']:<20} {'ERROR':>8}  {row['error']}")
            else:
                wtxt = " ".join(str(v) for v in row["weights"])
                print(
                    f"{row['entity']:<20} {row['topRank']:>8} {row['distance']:>9.3f} "
                    f"{row['equalWeightsRank']:>10}  {wtxt}"
                )
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_verify(args) -> int:
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        data = IndicatorMatrix(
            tuple(f"d{j + 1}" for j in range(4)),
            tuple(f"e{i + 1}" for i in range(6)),
            rng.random((4, 6)),
        )
    else:
        data = load_data(args.data)
    target = data.entity_index(args.entity) if args.entity else 0
    try:
        reference = brute_integer(data, target, args.cap, order="second")
    except OracleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    spec = OptimizationSpec(target=target, mode="integer", order="second",
                            weight_cap=args.cap, node_budget=default_node_budget())
    solution = optimize(data, spec)
    match_r = solution.r_star == reference.r_star
    match_d = abs((solution.d_star or 0.0) - (reference.d_star or 0.0)) <= 1e-9
    print(f"entity:      {data.entity_names[target]}")
    print(f"optimizer:   R*={solution.r_star} D*={solution.d_star:.9f}")
    print(f"brute force: R*={reference.r_star} D*={reference.d_star:.9f}")
    print("MATCH" if match_r and match_d else "MISMATCH")
    return EXIT_OK if match_r and match_d else EXIT_PARTIAL


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    data = load_data(args.data)
    app = create_app(data, node_budget=default_node_budget())
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _csv_cell(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


if __name__ == "__main__":
    sys.exit(main())
