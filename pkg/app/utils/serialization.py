"""Deterministic CSV, JSON and plot-file writers.

CSV: header row, '.' decimal point, LF endings, 17 significant digits, empty
cell for a missing value. JSON: two-space indent, floats written by repr
(shortest round-trip form), complex numbers as {"re": .., "im": ..}, NaN and
missing values as null.
"""
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from app.utils.errors import OutputError

logger = logging.getLogger(__name__)

STDOUT = "-"


def format_float(value: Optional[float]) -> str:
    """17 significant digits; empty string for missing or NaN"""
    if value is None:
        return ""
    number = float(value)
    if math.isnan(number):
        return ""
    return "%.17g" % number


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    """Render rows (dicts keyed by column name) as CSV text"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    return buffer.getvalue()


def to_jsonable(obj: Any) -> Any:
    """Convert dataclasses, enums, numpy values and complex numbers to JSON types"""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        number = float(obj)
        return None if math.isnan(number) or math.isinf(number) else number
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"Object of type {type(obj).__name__} is not serializable")


def render_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def complex_from_json(value: Mapping[str, Any]) -> complex:
    return complex(value["re"], value["im"])


def write_text(target: str, text: str) -> None:
    """Write text to a file path, or to standard output for '-'"""
    if target in (STDOUT, ""):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(target)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"Cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")


def write_plot_series(directory: Path, name: str, xs: Sequence[float], ys: Sequence[float]) -> Path:
    """Write a two-column whitespace-separated series file"""
    path = Path(directory) / f"{name}.dat"
    lines = [f"{format_float(x)} {format_float(y)}" for x, y in zip(xs, ys)]
    write_text(str(path), "\n".join(lines) + "\n")
    return path


def write_manifest(directory: Path, series: Dict[str, Path]) -> Path:
    """List series names and file paths in manifest.json"""
    path = Path(directory) / "manifest.json"
    entries: List[Dict[str, str]] = [
        {"name": name, "path": file_path.name} for name, file_path in series.items()
    ]
    write_text(str(path), render_json({"series": entries}))
    return path


def ensure_directory(target: str) -> Path:
    """Create an output directory, mapping failures to OutputError"""
    path = Path(target)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"Cannot create output directory {path}: {exc}") from exc
    if not path.is_dir():
        raise OutputError(f"Output path is not a directory: {path}")
    return path
