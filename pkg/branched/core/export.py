"""Deterministic JSON and CSV emission of results."""

import json
import logging
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

try:
    import polars as pl
except ImportError:
    pl = None

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
FORMATS = ("json", "csv")


def round_significant(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    """Round to a fixed number of significant digits (non-finite values pass through)."""
    if not math.isfinite(value) or value == 0.0:
        return value
    return float(f"{value:.{digits}g}")


def normalize(obj: Any) -> Any:
    """Turn results into plain JSON values with floats rounded to 12 significant digits.

    Objects exposing ``to_dict`` are expanded; Fractions become "p/q" strings, enums
    their values, numpy scalars and arrays their Python equivalents.
    """
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    if isinstance(obj, dict):
        return {str(key): normalize(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(item) for item in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = round_significant(float(obj))
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(obj, complex):
        return {"re": round_significant(obj.real), "im": round_significant(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    # Polynomials and other value objects print in their parseable form.
    return str(obj)


def to_json(payload: Any) -> str:
    """Serialise with fixed field order so identical inputs give identical bytes."""
    return json.dumps(normalize(payload), indent=2, ensure_ascii=False) + "\n"


def write_output(
    payload: Any,
    file_path: str | Path,
    format: str = "json",
    frame: "pl.DataFrame | None" = None,
) -> None:
    """Write a result to disk.

    Args:
        payload: Object serialised for the json format
        file_path: Destination path
        format: "json" or "csv"
        frame: Table written for the csv format

    Raises:
        ConfigurationError: If the format is unsupported or csv has no frame
        ImportError: If polars is not available for csv output
    """
    file_path = Path(file_path)
    fmt = format.lower()
    if fmt == "json":
        file_path.write_text(to_json(payload), encoding="utf-8")
    elif fmt == "csv":
        if pl is None:
            raise ImportError("Polars is required but not installed")
        if frame is None:
            raise ConfigurationError("this result has no tabular form; use --format json")
        frame.write_csv(file_path)
    else:
        raise ConfigurationError(f"Unsupported file format: {format}")
    logger.info("Wrote %s output to %s", fmt, file_path)
