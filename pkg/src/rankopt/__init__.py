"""Composite-indicator rank optimization toolkit."""

from .dataset import (
    DatasetError,
    IndicatorMatrix,
    Polarity,
    RawColumnSpec,
    embedded_fixture_2014,
    normalize_minmax,
    parse_csv,
)
from .lp import LinearProgram, LpInstabilityError, LpResult, solve_lp
from .optimizer import (
    BigMData,
    EntityOutcome,
    OptimizationSpec,
    Solution,
    SolverStats,
    maximize_distance_continuous,
    maximize_distance_integer,
    maximize_rank_continuous,
    maximize_rank_integer,
    minimize_rank,
    optimize,
    solve_all,
)
from .oracle import (
    OracleBudgetError,
    OracleResult,
    brute_continuous_distance,
    brute_continuous_rank,
    brute_integer,
)
from .ranking import (
    RankingTable,
    WeightError,
    WeightVector,
    composite_index,
    composite_scores,
    dominance_count,
    equal_weights,
    ranking_table,
)

__version__ = "0.1.0"

__all__ = [
    "BigMData",
    "DatasetError",
    "EntityOutcome",
    "IndicatorMatrix",
    "LinearProgram",
    "LpInstabilityError",
    "LpResult",
    "OptimizationSpec",
    "OracleBudgetError",
    "OracleResult",
    "Polarity",
    "RankingTable",
    "RawColumnSpec",
    "Solution",
    "SolverStats",
    "WeightError",
    "WeightVector",
    "brute_continuous_distance",
    "brute_continuous_rank",
    "brute_integer",
    "composite_index",
    "composite_scores",
    "dominance_count",
    "embedded_fixture_2014",
    "equal_weights",
    "maximize_distance_continuous",
    "maximize_distance_integer",
    "maximize_rank_continuous",
    "maximize_rank_integer",
    "minimize_rank",
    "normalize_minmax",
    "optimize",
    "parse_csv",
    "ranking_table",
    "solve_all",
    "solve_lp",
]
