import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankopt.dataset import (
    DatasetError,
    IndicatorMatrix,
    Polarity,
    RawColumnSpec,
    embedded_fixture_2014,
    normalize_minmax,
    parse_csv,
)


def test_parse_csv_small():
    matrix = parse_csv("entity,a,b\nX,0.5,1.0\nY,0.0,0.25")
    assert matrix.dimension_names == ("a", "b")
    assert matrix.entity_names == ("X", "Y")
    np.testing.assert_allclose(matrix.values, [[0.5, 0.0], [1.0, 0.25]])


def test_parse_csv_row_length_mismatch():
    with pytest.raises(DatasetError, match="row length mismatch"):
        parse_csv("entity,a,b\nX,0.5,1.0,0.3")


def test_parse_csv_non_numeric_cell():
    with pytest.raises(DatasetError, match="non-numeric"):
        parse_csv("entity,a\nX,oops")


def test_parse_csv_duplicate_entity():
    with pytest.raises(DatasetError, match="duplicate entity"):
        parse_csv("entity,a\nX,0.5\nX,0.2")


def test_parse_csv_normalized_flag_rejects_out_of_range():
    with pytest.raises(DatasetError, match="outside"):
        parse_csv("entity,a\nX,1.5")


def test_parse_csv_accepts_germany_row():
    row = [0.626, 0.527, 0.826, 0.893, 0.797, 0.877, 0.393, 0.719, 0.742, 0.896, 0.795]
    header = "entity," + ",".join(f"d{i}" for i in range(11))
    text = header + "\nGermany," + ",".join(str(v) for v in row)
    matrix = parse_csv(text)
    np.testing.assert_allclose(matrix.values[:, 0], row)
    assert matrix.values.min() >= 0.0 and matrix.values.max() <= 1.0


def test_parse_csv_unnormalized_applies_minmax():
    matrix = parse_csv("entity,a\nX,10\nY,20\nZ,30", already_normalized=False)
    np.testing.assert_allclose(matrix.values[0], [0.0, 0.5, 1.0])


def test_csv_round_trip_identity():
    text = "entity,a,b\nX,0.5,1.0\nY,0.0,0.25\n"
    matrix = parse_csv(text)
    again = parse_csv(matrix.to_csv())
    assert again.dimension_names == matrix.dimension_names
    assert again.entity_names == matrix.entity_names
    np.testing.assert_array_equal(again.values, matrix.values)


def test_json_round_trip_identity():
    matrix = embedded_fixture_2014()
    again = IndicatorMatrix.from_json_dict(matrix.to_json_dict())
    assert again.entity_names == matrix.entity_names
    np.testing.assert_array_equal(again.values, matrix.values)


def test_normalize_minmax_polarity():
    raw = np.array([[10.0, 20.0, 30.0]])
    up = normalize_minmax(raw, [RawColumnSpec("a")])
    np.testing.assert_allclose(up.values[0], [0.0, 0.5, 1.0])
    down = normalize_minmax(raw, [RawColumnSpec("a", Polarity.LOWER_IS_BETTER)])
    np.testing.assert_allclose(down.values[0], [1.0, 0.5, 0.0])


def test_normalize_minmax_constant_column_warns():
    with pytest.warns(UserWarning, match="constant"):
        matrix = normalize_minmax(np.array([[7.0, 7.0, 7.0]]), [RawColumnSpec("a")])
    np.testing.assert_allclose(matrix.values[0], 0.5)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 5),
    st.integers(2, 6),
    st.integers(0, 10_000),
)
def test_normalize_minmax_bounds_property(q, n, seed):
    rng = np.random.default_rng(seed)
    raw = rng.normal(scale=100.0, size=(q, n))
    specs = [
        RawColumnSpec(f"d{j}", Polarity.LOWER_IS_BETTER if j % 2 else Polarity.HIGHER_IS_BETTER)
        for j in range(q)
    ]
    matrix = normalize_minmax(raw, specs)
    assert matrix.values.min() >= 0.0
    assert matrix.values.max() <= 1.0
    for j in range(q):
        column = matrix.values[j]
        if raw[j].max() > raw[j].min():
            assert column.min() == pytest.approx(0.0, abs=1e-12)
            assert column.max() == pytest.approx(1.0, abs=1e-12)


def test_fixture_shape_and_range():
    matrix = embedded_fixture_2014()
    assert matrix.num_entities == 15
    assert matrix.num_dimensions == 11
    assert matrix.values.min() >= 0.0
    assert matrix.values.max() <= 1.0


def test_fixture_lookups():
    matrix = embedded_fixture_2014()
    assert matrix.value("Safety", "Poland") == pytest.approx(0.982)
    assert matrix.value("Health", "Spain") == pytest.approx(0.861)
    assert matrix.value("Income", "United States") == pytest.approx(1.0)


def test_entity_lookup_case_insensitive():
    matrix = embedded_fixture_2014()
    assert matrix.entity_index("united states") == matrix.entity_index("United States")
    with pytest.raises(KeyError):
        matrix.entity_index("Atlantis")


def test_matrix_is_immutable():
    matrix = embedded_fixture_2014()
    with pytest.raises(ValueError):
        matrix.values[0, 0] = 0.3


def test_matrix_validation():
    with pytest.raises(DatasetError):
        IndicatorMatrix(("a",), ("X",), np.array([[1.5]]))
    with pytest.raises(DatasetError):
        IndicatorMatrix(("a", "a"), ("X",), np.array([[0.1], [0.2]]))
    with pytest.raises(DatasetError):
        IndicatorMatrix((), (), np.zeros((0, 0)))
