"""Indicator datasets: CSV/JSON ingestion, min-max normalization, embedded 2014 data."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or inconsistent indicator data."""


class Polarity(Enum):
    """Direction in which a raw column is 'good'."""

    HIGHER_IS_BETTER = "higher_is_better"
    LOWER_IS_BETTER = "lower_is_better"


@dataclass(frozen=True)
class RawColumnSpec:
    """Name and polarity of one raw (un-normalized) data column."""

    name: str
    polarity: Polarity = Polarity.HIGHER_IS_BETTER


@dataclass(frozen=True)
class IndicatorMatrix:
    """Normalized indicator values for C entities across Q dimensions.

    ``values`` has shape (Q, C) with every entry in [0, 1].  Instances are
    immutable (the array is marked read-only) and safe to share between
    threads.
    """

    dimension_names: tuple[str, ...]
    entity_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dimension_names", tuple(self.dimension_names))
        object.__setattr__(self, "entity_names", tuple(self.entity_names))
        values = np.array(self.values, dtype=float)
        q, c = len(self.dimension_names), len(self.entity_names)
        if q < 1 or c < 1:
            raise DatasetError("need at least one dimension and one entity")
        if values.shape != (q, c):
            raise DatasetError(
                f"values shape {values.shape} does not match {q} dimensions x {c} entities"
            )
        if not np.all(np.isfinite(values)):
            raise DatasetError("indicator values must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise DatasetError("normalized indicator values must lie in [0, 1]")
        for kind, names in (("dimension", self.dimension_names), ("entity", self.entity_names)):
            if len(set(names)) != len(names):
                raise DatasetError(f"duplicate {kind} name")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def num_dimensions(self) -> int:
        return len(self.dimension_names)

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    def entity_index(self, name: str) -> int:
        """Case-insensitive exact lookup of an entity name."""
        lowered = name.strip().lower()
        for i, candidate in enumerate(self.entity_names):
            if candidate.lower() == lowered:
                return i
        raise KeyError(f"unknown entity {name!r}")

    def dimension_index(self, name: str) -> int:
        lowered = name.strip().lower()
        for i, candidate in enumerate(self.dimension_names):
            if candidate.lower() == lowered:
                return i
        raise KeyError(f"unknown dimension {name!r}")

    def value(self, dimension: str, entity: str) -> float:
        return float(self.values[self.dimension_index(dimension), self.entity_index(entity)])

    def to_csv(self) -> str:
        """Entity-major CSV with header ``entity,dim1,...,dimQ``."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["entity", *self.dimension_names])
        for c, name in enumerate(self.entity_names):
            writer.writerow([name, *(repr(float(v)) for v in self.values[:, c])])
        return out.getvalue()

    def to_json_dict(self) -> dict:
        """JSON mirror of the CSV layout: values are entity-major."""
        return {
            "dimensions": list(self.dimension_names),
            "entities": list(self.entity_names),
            "values": self.values.T.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "IndicatorMatrix":
        try:
            dimensions = payload["dimensions"]
            entities = payload["entities"]
            values = np.asarray(payload["values"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed dataset JSON: {exc}") from exc
        if values.ndim != 2 or values.shape != (len(entities), len(dimensions)):
            raise DatasetError("dataset JSON values must be entity-major with one row per entity")
        return cls(tuple(dimensions), tuple(entities), values.T)


def parse_csv(text: str, already_normalized: bool = True) -> IndicatorMatrix:
    """Parse an entity-major CSV (header ``entity,dim1,...,dimQ``).

    With ``already_normalized`` every value must lie in [0, 1]; otherwise the
    raw columns are min-max normalized treating every dimension as
    higher-is-better (use :func:`normalize_minmax` directly for mixed
    polarities).
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise DatasetError("CSV needs a header row and at least one entity row")
    header = [cell.strip() for cell in rows[0]]
    if len(header) < 2:
        raise DatasetError("CSV header needs an entity column and at least one dimension")
    dimensions = tuple(header[1:])
    entities: list[str] = []
    data: list[list[float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DatasetError(
                f"row length mismatch on line {lineno}: expected {len(header)} cells, got {len(row)}"
            )
        name = row[0].strip()
        if name in entities:
            raise DatasetError(f"duplicate entity name {name!r} on line {lineno}")
        try:
            values = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise DatasetError(f"non-numeric cell on line {lineno}: {exc}") from exc
        entities.append(name)
        data.append(values)
    matrix = np.asarray(data, dtype=float).T  # (Q, C)
    if not np.all(np.isfinite(matrix)):
        raise DatasetError("indicator values must be finite")
    if already_normalized:
        if matrix.min() < 0.0 or matrix.max() > 1.0:
            raise DatasetError("normalized flag set but a value lies outside [0, 1]")
        return IndicatorMatrix(dimensions, tuple(entities), matrix)
    specs = [RawColumnSpec(name) for name in dimensions]
    return normalize_minmax(matrix, specs, entity_names=entities)


def normalize_minmax(
    raw: np.ndarray,
    specs: list[RawColumnSpec],
    entity_names: list[str] | None = None,
) -> IndicatorMatrix:
    """Min-max normalize a raw (Q, C) matrix so each dimension spans [0, 1].

    The best entity of a dimension maps to 1 and the worst to 0; a constant
    dimension maps everywhere to 0.5 (ranking-neutral) with a warning.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise DatasetError("raw matrix must be 2-dimensional (dimensions x entities)")
    if not np.all(np.isfinite(raw)):
        raise DatasetError("raw values must be finite")
    if len(specs) != raw.shape[0]:
        raise DatasetError(f"expected {raw.shape[0]} column specs, got {len(specs)}")
    if entity_names is None:
        entity_names = [f"e{i + 1}" for i in range(raw.shape[1])]
    normalized = np.empty_like(raw)
    for q, spec in enumerate(specs):
        column = raw[q]
        lo, hi = column.min(), column.max()
        if hi == lo:
            warnings.warn(
                f"dimension {spec.name!r} is constant; mapping every entity to 0.5",
                stacklevel=2,
            )
            normalized[q] = 0.5
        elif spec.polarity is Polarity.HIGHER_IS_BETTER:
            normalized[q] = (column - lo) / (hi - lo)
        else:
            normalized[q] = (hi - column) / (hi - lo)
    return IndicatorMatrix(tuple(s.name for s in specs), tuple(entity_names), normalized)


DIMENSIONS_2014 = (
    "Housing",
    "Income",
    "Jobs",
    "Community",
    "Education",
    "Environment",
    "Civic Engagement",
    "Health",
    "Life Satisfaction",
    "Safety",
    "Work-Life Balance",
)

# 2014 values for the 15 countries shown in the worked ranking examples,
# transcribed at the 3-decimal precision they are published with.
_FIXTURE_2014 = {
    "Germany":       (0.626, 0.527, 0.826, 0.893, 0.797, 0.877, 0.393, 0.719, 0.742, 0.896, 0.795),
    "Switzerland":   (0.623, 0.726, 0.956, 0.929, 0.745, 0.832, 0.337, 0.925, 1.000, 0.870, 0.713),
    "Finland":       (0.633, 0.349, 0.748, 0.893, 0.915, 0.900, 0.596, 0.745, 0.871, 0.922, 0.737),
    "Denmark":       (0.616, 0.396, 0.810, 1.000, 0.774, 0.900, 0.706, 0.737, 0.935, 0.877, 0.978),
    "Canada":        (0.766, 0.572, 0.801, 0.929, 0.765, 0.853, 0.584, 0.918, 0.935, 0.972, 0.613),
    "Poland":        (0.360, 0.129, 0.524, 0.750, 0.840, 0.487, 0.531, 0.520, 0.323, 0.982, 0.562),
    "Japan":         (0.484, 0.569, 0.799, 0.786, 0.782, 0.694, 0.393, 0.496, 0.419, 0.996, 0.526),
    "Korea":         (0.574, 0.229, 0.759, 0.321, 0.799, 0.537, 0.749, 0.497, 0.419, 0.949, 0.417),
    "Spain":         (0.688, 0.293, 0.258, 0.857, 0.536, 0.590, 0.506, 0.861, 0.484, 0.866, 0.933),
    "Netherlands":   (0.688, 0.525, 0.868, 0.857, 0.761, 0.688, 0.511, 0.829, 0.871, 0.832, 0.878),
    "Sweden":        (0.625, 0.496, 0.782, 0.821, 0.790, 0.986, 0.878, 0.884, 0.871, 0.821, 0.809),
    "Norway":        (0.764, 0.392, 0.920, 0.893, 0.719, 0.896, 0.651, 0.808, 0.968, 0.873, 0.871),
    "Austria":       (0.582, 0.497, 0.859, 0.964, 0.669, 0.738, 0.564, 0.763, 0.903, 0.905, 0.599),
    "Iceland":       (0.595, 0.361, 0.866, 1.000, 0.726, 0.878, 0.527, 0.886, 0.903, 0.919, 0.568),
    "United States": (0.789, 1.000, 0.796, 0.786, 0.699, 0.784, 0.536, 0.851, 0.742, 0.894, 0.530),
}


def embedded_fixture_2014() -> IndicatorMatrix:
    """The embedded 15-entity x 11-dimension 2014 well-being subset."""
    entities = tuple(_FIXTURE_2014)
    values = np.array([_FIXTURE_2014[name] for name in entities], dtype=float).T
    return IndicatorMatrix(DIMENSIONS_2014, entities, values)
