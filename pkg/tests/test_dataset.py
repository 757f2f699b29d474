import io
import json

import numpy as np
import pytest

from depcon.dataset import (
    Dataset,
    dataset_to_csv,
    dataset_to_json,
    load_dataset,
    load_dataset_json,
)
from depcon.errors import (
    NonFiniteValueError,
    NonNumericCellError,
    RaggedRowsError,
    TooFewFeaturesError,
    TooFewSamplesError,
)


def test_minimal_parse_with_header():
    ds = load_dataset(io.StringIO("a,b\n0,1\n1,0\n"), has_header=True)
    assert ds.n == 2 and ds.m == 2
    assert ds.feature_names == ("a", "b")
    assert np.array_equal(ds.values, [[0.0, 1.0], [1.0, 0.0]])


def test_non_numeric_cell_coordinates():
    with pytest.raises(NonNumericCellError) as err:
        load_dataset(io.StringIO("0,1\n1,x\n"))
    assert err.value.row == 1 and err.value.col == 1


def test_gene_expression_layout():
    rng = np.random.default_rng(0)
    body = "\n".join(",".join(f"{v:.4f}" for v in row) for row in rng.normal(size=(517, 11)))
    ds = load_dataset(io.StringIO(body + "\n"))
    assert ds.n == 517 and ds.m == 11


def test_ragged_rows():
    with pytest.raises(RaggedRowsError):
        load_dataset(io.StringIO("0,1\n1,2,3\n"))


def test_too_few_samples_and_features():
    with pytest.raises(TooFewSamplesError):
        load_dataset(io.StringIO("0,1\n"))
    with pytest.raises(TooFewFeaturesError):
        load_dataset(io.StringIO("0\n1\n"))


def test_non_finite_rejected():
    with pytest.raises(NonFiniteValueError):
        load_dataset(io.StringIO("0,1\n1,inf\n"))
    with pytest.raises(NonFiniteValueError):
        Dataset(np.array([[0.0, 1.0], [np.nan, 0.0]]))


def test_header_sniffing_not_applied_without_flag():
    with pytest.raises(NonNumericCellError):
        load_dataset(io.StringIO("a,b\n0,1\n1,0\n"), has_header=False)


def test_json_roundtrip():
    ds = Dataset(np.array([[1.0, 2.0], [3.0, 4.0]]), ("x", "y"))
    again = load_dataset_json(io.StringIO(json.dumps(dataset_to_json(ds))))
    assert again.feature_names == ("x", "y")
    assert np.array_equal(again.values, ds.values)


def test_csv_roundtrip():
    ds = Dataset(np.array([[1.5, -2.0], [0.25, 4.0], [3.0, 0.0]]), ("u", "v"))
    again = load_dataset(io.StringIO(dataset_to_csv(ds)), has_header=True)
    assert np.array_equal(again.values, ds.values)
