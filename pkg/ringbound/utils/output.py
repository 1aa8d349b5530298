"""
Output Writers
Atomic CSV, manifest and JSON writers for scenario results
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """
    Render one cell: floats with 15 significant digits ('.' decimal,
    exponent notation for extremes), inf as ``inf``, booleans as
    ``true``/``false``.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".15g")
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def atomic_write(path: PathLike, data: Union[str, bytes]) -> Path:
    """
    Write a file via a temporary sibling and ``os.replace``, so the target is
    either complete or absent.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        if mode == "wb":
            with os.fdopen(fd, mode) as fh:
                fh.write(data)
        else:
            with os.fdopen(fd, mode, encoding="utf-8", newline="") as fh:
                fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("wrote %s", path)
    return path


def render_table(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: Optional[Mapping[str, Any]] = None,
) -> str:
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}: {format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_table(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Write a comma-separated table with a header row.

    Args:
        path: Target file
        header: Column names
        rows: Data rows
        meta: Optional ``# key: value`` lines placed above the header

    Returns:
        The written path
    """
    return atomic_write(path, render_table(header, rows, meta))


def write_manifest(path: PathLike, entries: Mapping[str, Any]) -> Path:
    """Write ``key = value`` lines in insertion order."""
    text = "".join(f"{key} = {format_value(value)}\n" for key, value in entries.items())
    return atomic_write(path, text)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    return value


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    """Write a summary record; non-finite floats become strings."""
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    return atomic_write(path, text)
