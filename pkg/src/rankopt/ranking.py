"""Composite indices, rankings, and dominance counts for a given weight vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import IndicatorMatrix

#: Absolute tolerance on composite-index comparisons; ties within it count
#: in favor of the entity being ranked.
DEFAULT_TIE_TOL = 1e-9

INTEGER_WEIGHT_CAP = 5


class WeightError(ValueError):
    """Raised for weight vectors that violate their mode's constraints."""


@dataclass(frozen=True)
class WeightVector:
    """Raw weights plus the normalized weights that always sum to 10.

    Continuous mode: raw == normalized, entries >= 0, sum exactly 10.
    Integer mode: raw entries in {0..5} with at least one non-zero;
    normalized = 10 * raw / sum(raw).
    """

    mode: str
    raw: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float)
        normalized = np.array(self.normalized, dtype=float)
        raw.setflags(write=False)
        normalized.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "normalized", normalized)
        if self.mode not in ("continuous", "integer"):
            raise WeightError(f"unknown weight mode {self.mode!r}")
        if abs(float(normalized.sum()) - 10.0) > 1e-9:
            raise WeightError("normalized weights must sum to 10")

    @classmethod
    def continuous(cls, values) -> "WeightVector":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise WeightError("weights must be a non-empty 1-d vector")
        if not np.all(np.isfinite(values)):
            raise WeightError("weights must be finite")
        if values.min() < -1e-12:
            raise WeightError("continuous weights must be non-negative")
        if abs(float(values.sum()) - 10.0) > 1e-9:
            raise WeightError("continuous weights must sum to 10")
        clipped = np.clip(values, 0.0, None)
        return cls("continuous", clipped, clipped)

    @classmethod
    def integer(cls, values) -> "WeightVector":
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise WeightError("weights must be a non-empty 1-d vector")
        rounded = np.round(arr)
        if not np.allclose(arr, rounded, atol=1e-9):
            raise WeightError("integer-mode weights must be whole numbers")
        ints = rounded.astype(int)
        if ints.min() < 0 or ints.max() > INTEGER_WEIGHT_CAP:
            raise WeightError(f"integer weights must lie in 0..{INTEGER_WEIGHT_CAP}")
        total = int(ints.sum())
        if total < 1:
            raise WeightError("integer weights must have at least one non-zero entry")
        return cls("integer", ints.astype(float), 10.0 * ints / total)

    def __len__(self) -> int:
        return self.raw.size


def equal_weights(num_dimensions: int) -> WeightVector:
    """Continuous vector assigning 10/Q to each of the Q dimensions."""
    if num_dimensions < 1:
        raise WeightError("need at least one dimension")
    return WeightVector.continuous(np.full(num_dimensions, 10.0 / num_dimensions))


def composite_scores(data: IndicatorMatrix, weights: WeightVector) -> np.ndarray:
    """Composite index of every entity: CI_c = sum_q normalized_q * I[q, c]."""
    if len(weights) != data.num_dimensions:
        raise WeightError(
            f"weight vector has {len(weights)} entries, dataset has {data.num_dimensions} dimensions"
        )
    return weights.normalized @ data.values


def composite_index(data: IndicatorMatrix, weights: WeightVector, entity: int) -> float:
    """Composite index of one entity; always in [0, 10]."""
    _check_entity(data, entity)
    return float(composite_scores(data, weights)[entity])


def dominance_count(
    data: IndicatorMatrix,
    weights: WeightVector,
    entity: int,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> int:
    """Number of rivals with a composite index at most the entity's own.

    Ties (within ``tie_tol``) count in the entity's favor.
    """
    _check_entity(data, entity)
    scores = composite_scores(data, weights)
    dominated = scores[entity] >= scores - tie_tol
    return int(dominated.sum()) - 1  # drop the self-comparison


@dataclass(frozen=True)
class RankingTable:
    """Per-entity composite index, dominance count, and rank.

    Arrays are aligned with the dataset's entity order; ``display_order``
    lists entity indices by descending composite index (ties broken by
    entity index, display only — tied entities share a rank).
    """

    entity_names: tuple[str, ...]
    ci: np.ndarray
    dominance: np.ndarray
    rank: np.ndarray
    display_order: np.ndarray

    def rows(self):
        """Yield (rank, entity, ci, dominance_count) in display order."""
        for c in self.display_order:
            yield int(self.rank[c]), self.entity_names[c], float(self.ci[c]), int(self.dominance[c])


def ranking_table(
    data: IndicatorMatrix,
    weights: WeightVector,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> RankingTable:
    """Rank every entity under ``weights``; rank_c = C - dominance_count_c."""
    scores = composite_scores(data, weights)
    c_total = data.num_entities
    dominated = scores[:, None] >= scores[None, :] - tie_tol
    dominance = dominated.sum(axis=1) - 1
    rank = c_total - dominance
    order = np.lexsort((np.arange(c_total), -scores))
    return RankingTable(data.entity_names, scores, dominance, rank, order)


def _check_entity(data: IndicatorMatrix, entity: int) -> None:
    if not 0 <= entity < data.num_entities:
        raise IndexError(f"entity index {entity} out of range 0..{data.num_entities - 1}")
