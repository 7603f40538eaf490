"""
Report and side-file writers.

JSON reports keep insertion order, print floats with 17 significant digits,
write complex numbers as {"re": .., "im": ..} and non-finite values as
strings, so identical inputs give identical bytes. CSV side files go
through pandas.
"""

import hashlib
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd
import structlog

from hypres.utils.error_manager import ConfigurationError

logger = structlog.get_logger()

SCHEMA_VERSION = "1.0"


def _float_text(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    if value == 0.0:
        return "0.0"
    return format(value, ".17g")


def to_plain(obj: Any) -> Any:
    """Convert numpy, complex, enum and dataclass values to JSON-compatible objects."""
    if hasattr(obj, "to_dict") and callable(obj.to_dict) and not isinstance(obj, (pd.DataFrame, pd.Series)):
        return to_plain(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    return json.dumps(obj)


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text for a report or record."""
    return _emit(to_plain(obj), indent, 0) + "\n"


def canonical_hash(obj: Any) -> str:
    """sha256 of the key-sorted compact JSON of obj."""
    text = json.dumps(to_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_number(value: Any) -> Any:
    """Inverse of the report encoding for single numbers."""
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return complex(parse_number(value["re"]), parse_number(value["im"]))
    if isinstance(value, str) and value in ("nan", "inf", "-inf"):
        return float(value)
    return value


def with_schema(report: Dict[str, Any]) -> Dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, **report}


def _ensure_directory(directory: Union[str, Path]) -> Path:
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"output directory {str(path)!r} is not writable: {e}")
    return path


def write_json(report: Dict[str, Any], directory: Union[str, Path], name: str = "report.json") -> Path:
    path = _ensure_directory(directory) / name
    path.write_text(dumps(report), encoding="utf-8")
    logger.info("report written", path=str(path))
    return path


def write_csv(frame: pd.DataFrame, directory: Union[str, Path], name: str) -> Path:
    """CSV with pandas' shortest round-trip float representation."""
    path = _ensure_directory(directory) / name
    frame.to_csv(path, index=False)
    logger.info("csv written", path=str(path), rows=len(frame))
    return path
