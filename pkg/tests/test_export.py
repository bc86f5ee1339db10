"""Tests for JSON and CSV output."""

import json
from fractions import Fraction

import numpy as np
import polars as pl
import pytest

from branched.core.errors import ConfigurationError
from branched.core.export import normalize, round_significant, to_json, write_output
from branched.core.model import Branch


def test_round_significant():
    """Test rounding keeps twelve significant digits."""
    assert round_significant(16.848680531234567) == 16.8486805312
    assert round_significant(1.23456789012345e-7) == 1.23456789012e-7
    assert round_significant(0.0) == 0.0
    assert round_significant(float("inf")) == float("inf")


def test_normalize_converts_value_types():
    """Test fractions, enums, numpy values and non-finite floats become JSON values."""
    payload = {
        "L": Fraction(-2, 9),
        "branch": Branch.MINUS,
        "levels": np.array([1.0, 2.5]),
        "count": np.int64(3),
        "flag": np.bool_(True),
        "root": complex(-0.5, 0.5),
        "missing": float("nan"),
        "bound": float("-inf"),
        "pair": (1, 2),
        "label": None,
    }
    assert normalize(payload) == {
        "L": "-2/9",
        "branch": "minus",
        "levels": [1.0, 2.5],
        "count": 3,
        "flag": True,
        "root": {"re": -0.5, "im": 0.5},
        "missing": "nan",
        "bound": "-inf",
        "pair": [1, 2],
        "label": None,
    }


def test_normalize_expands_to_dict():
    """Test objects with a to_dict method are expanded."""

    class Result:
        def to_dict(self):
            return {"energy": 15.0000000000001}

    assert normalize([Result()]) == [{"energy": 15.0}]


def test_to_json_is_deterministic():
    """Test identical payloads serialise to identical text."""
    payload = {"b": 1.0, "a": [Fraction(1, 3)]}
    text = to_json(payload)
    assert text == to_json(dict(payload))
    assert text.endswith("\n")
    assert json.loads(text) == {"b": 1.0, "a": ["1/3"]}
    assert list(json.loads(text)) == ["b", "a"]


def test_write_output_json(tmp_path):
    """Test the json format writes the normalised payload."""
    path = tmp_path / "out.json"
    write_output({"energy": 16.848680531234567}, path)
    assert json.loads(path.read_text()) == {"energy": 16.8486805312}


def test_write_output_csv(tmp_path):
    """Test the csv format writes the frame."""
    path = tmp_path / "out.csv"
    frame = pl.DataFrame({"n": [0, 1], "energy": [15.0, 35.0]})
    write_output({}, path, format="CSV", frame=frame)
    assert path.read_text().splitlines()[0] == "n,energy"
    assert pl.read_csv(path).height == 2


def test_write_output_errors(tmp_path):
    """Test csv without a frame and unknown formats are refused."""
    with pytest.raises(ConfigurationError, match="no tabular form"):
        write_output({}, tmp_path / "out.csv", format="csv")
    with pytest.raises(ConfigurationError, match="Unsupported file format"):
        write_output({}, tmp_path / "out.xml", format="xml")
