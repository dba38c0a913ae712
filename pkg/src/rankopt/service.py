"""JSON-over-HTTP facade for interactive ranking and weight optimization."""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .dataset import IndicatorMatrix
from .optimizer import DEFAULT_NODE_BUDGET, OptimizationSpec, Solution, optimize
from .ranking import WeightError, WeightVector, equal_weights, ranking_table

DEFAULT_TIME_BUDGET = 120.0

_ORDER_ALIASES = {1: "first", 2: "second", "1": "first", "2": "second",
                  "first": "first", "second": "second"}


class RankRequest(BaseModel):
    weights: list[float] = Field(min_length=1)
    mode: Literal["continuous", "integer"] = "integer"


class OptimizeRequest(BaseModel):
    entity: str
    mode: Literal["continuous", "integer"] = "integer"
    order: int | str = 2
    direction: Literal["best", "worst"] = "best"


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse({"code": code, "message": message, **extra}, status_code=status)


def create_app(
    data: IndicatorMatrix | None,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    time_budget: float | None = DEFAULT_TIME_BUDGET,
) -> FastAPI:
    """Build the service around one immutable dataset.

    The app is stateless beyond that dataset; solves run synchronously on
    the request's worker thread, so other requests stay responsive.
    """
    app = FastAPI(title="rankopt", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.data = data

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # Distinguish unparseable bodies (400) from well-formed but invalid ones (422).
        if any(err.get("type") == "json_invalid" for err in exc.errors()):
            return _error(400, "malformed_json", "request body is not valid JSON")
        return _error(422, "invalid_request", str(exc.errors()))

    def current_data() -> IndicatorMatrix | None:
        return app.state.data

    @app.get("/api/dataset")
    def get_dataset():
        matrix = current_data()
        if matrix is None:
            return _error(503, "no_dataset", "no dataset loaded")
        return matrix.to_json_dict()

    @app.post("/api/rank")
    def post_rank(body: RankRequest):
        matrix = current_data()
        if matrix is None:
            return _error(503, "no_dataset", "no dataset loaded")
        if len(body.weights) != matrix.num_dimensions:
            return _error(
                422, "bad_arity",
                f"expected {matrix.num_dimensions} weights, got {len(body.weights)}",
            )
        try:
            if body.mode == "integer":
                weights = WeightVector.integer(body.weights)
            else:
                weights = WeightVector.continuous(body.weights)
        except WeightError as exc:
            return _error(422, "invalid_weights", str(exc))
        return _ranking_payload(matrix, weights)

    @app.post("/api/optimize")
    def post_optimize(body: OptimizeRequest):
        matrix = current_data()
        if matrix is None:
            return _error(503, "no_dataset", "no dataset loaded")
        order = _ORDER_ALIASES.get(body.order)
        if order is None:
            return _error(422, "invalid_order", f"order must be 1 or 2, got {body.order!r}")
        try:
            target = matrix.entity_index(body.entity)
        except KeyError:
            return _error(404, "unknown_entity", f"unknown entity {body.entity!r}")
        if body.direction == "worst" and order == "second":
            return _error(422, "invalid_order", "the worst direction has no second-order problem")
        spec = OptimizationSpec(
            target=target,
            order=order,
            mode=body.mode,
            direction=body.direction,
            node_budget=node_budget,
            time_budget=time_budget,
        )
        solution = optimize(matrix, spec)
        payload = _solution_payload(matrix, target, solution)
        if not solution.proven:
            return _error(503, "budget_exhausted",
                          "solve hit its budget; best incumbent attached",
                          incumbent=payload)
        return payload

    return app


def _ranking_payload(matrix: IndicatorMatrix, weights: WeightVector) -> list[dict]:
    table = ranking_table(matrix, weights)
    eq_rank = ranking_table(matrix, equal_weights(matrix.num_dimensions)).rank
    return [
        {
            "entity": entity,
            "ci": ci,
            "rank": rank,
            "equalWeightsRank": int(eq_rank[matrix.entity_names.index(entity)]),
        }
        for rank, entity, ci, _ in table.rows()
    ]


def _solution_payload(matrix: IndicatorMatrix, target: int, solution: Solution) -> dict:
    mode = solution.weights.mode
    return {
        "entity": matrix.entity_names[target],
        "topRank": solution.top_rank,
        "rStar": solution.r_star,
        "distance": solution.d_star,
        "weights": [int(v) if mode == "integer" else float(v) for v in solution.weights.raw],
        "proven": solution.proven,
        "stats": {"nodes": solution.stats.nodes, "lpSolves": solution.stats.lp_solves},
    }
