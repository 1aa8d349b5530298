"""
Grid Files
Text and binary readers/writers for sampled grids (field ingestion and
potential export share one format)
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ringbound.exceptions import GridFormatError
from ringbound.models.fields import GridField
from ringbound.models.geometry import Region
from ringbound.models.results import GridSolution
from ringbound.utils.output import atomic_write, format_value

logger = logging.getLogger(__name__)

TEXT_HEADER = "# ringbound grid v1"
BINARY_MAGIC = b"RBGRID1\n"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class GridData:
    """Extents of the sampled box and the row-major cell-centre samples."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    values: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def counts(self) -> Tuple[int, ...]:
        return tuple(self.values.shape)


def _check(grid: GridData) -> GridData:
    if grid.dimension < 1 or len(grid.upper) != grid.dimension:
        raise GridFormatError("lower and upper extents must have the grid dimension")
    if grid.values.ndim != grid.dimension:
        raise GridFormatError(
            f"values have {grid.values.ndim} axes but the header declares {grid.dimension}"
        )
    if not all(lo < hi for lo, hi in zip(grid.lower, grid.upper)):
        raise GridFormatError("grid extents need lower < upper on every axis")
    if np.isnan(grid.values).any() or (grid.values < 0).any():
        raise GridFormatError("grid values must be nonnegative")
    return grid


def _parse_text(text: str, source: str) -> GridData:
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0] != TEXT_HEADER:
        raise GridFormatError(f"{source}: missing '{TEXT_HEADER}' header line")
    header = {}
    idx = 1
    while idx < len(lines):
        line = lines[idx]
        idx += 1
        if not line or line.startswith("#"):
            continue
        if line == "values":
            break
        key, _, rest = line.partition(" ")
        if key not in ("dimension", "lower", "upper", "counts"):
            raise GridFormatError(f"{source}: unknown header key {key!r}")
        header[key] = rest.split()
    else:
        raise GridFormatError(f"{source}: no 'values' line")
    missing = [k for k in ("dimension", "lower", "upper", "counts") if k not in header]
    if missing:
        raise GridFormatError(f"{source}: header is missing {missing}")
    try:
        n = int(header["dimension"][0])
        lower = tuple(float(v) for v in header["lower"])
        upper = tuple(float(v) for v in header["upper"])
        counts = tuple(int(v) for v in header["counts"])
        values = np.array(" ".join(lines[idx:]).split(), dtype=float)
    except (ValueError, IndexError) as exc:
        raise GridFormatError(f"{source}: malformed grid ({exc})") from exc
    if len(lower) != n or len(upper) != n or len(counts) != n:
        raise GridFormatError(f"{source}: extents and counts must have {n} entries")
    if values.size != int(np.prod(counts)):
        raise GridFormatError(
            f"{source}: expected {int(np.prod(counts))} values, found {values.size}"
        )
    return _check(GridData(lower, upper, values.reshape(counts)))


def _parse_binary(blob: bytes, source: str) -> GridData:
    offset = len(BINARY_MAGIC)
    try:
        (n,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        lower = struct.unpack_from(f"<{n}d", blob, offset)
        offset += 8 * n
        upper = struct.unpack_from(f"<{n}d", blob, offset)
        offset += 8 * n
        counts = struct.unpack_from(f"<{n}Q", blob, offset)
        offset += 8 * n
    except struct.error as exc:
        raise GridFormatError(f"{source}: truncated binary header") from exc
    total = int(np.prod(counts))
    if len(blob) - offset != 8 * total:
        raise GridFormatError(
            f"{source}: expected {total} float64 values, found {(len(blob) - offset) / 8:g}"
        )
    values = np.frombuffer(blob, dtype="<f8", count=total, offset=offset).astype(float)
    return _check(GridData(tuple(lower), tuple(upper), values.reshape(counts)))


def read_grid(path: PathLike) -> GridData:
    """
    Read a grid file, detecting the text or binary form.

    Raises:
        GridFormatError: If the file is malformed
        OSError: If the file cannot be read
    """
    path = Path(path)
    blob = path.read_bytes()
    if blob.startswith(BINARY_MAGIC):
        return _parse_binary(blob, str(path))
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GridFormatError(f"{path}: neither a text nor a binary grid") from exc
    return _parse_text(text, str(path))


def render_text(grid: GridData) -> str:
    grid = _check(grid)
    out = [
        TEXT_HEADER,
        f"dimension {grid.dimension}",
        "lower " + format_value(grid.lower),
        "upper " + format_value(grid.upper),
        "counts " + " ".join(str(c) for c in grid.counts),
        "values",
    ]
    flat = grid.values.reshape(-1, grid.counts[-1])
    out.extend(format_value(row) for row in flat)
    return "\n".join(out) + "\n"


def render_binary(grid: GridData) -> bytes:
    grid = _check(grid)
    n = grid.dimension
    head = BINARY_MAGIC + struct.pack(
        f"<I{n}d{n}d{n}Q", n, *grid.lower, *grid.upper, *grid.counts
    )
    return head + np.ascontiguousarray(grid.values, dtype="<f8").tobytes()


def write_grid(path: PathLike, grid: GridData, binary: bool = False) -> Path:
    """Write a grid atomically in the text or binary form."""
    data = render_binary(grid) if binary else render_text(grid)
    return atomic_write(path, data)


def load_grid_field(
    path: PathLike, default: Optional[float] = None, support: Optional[Region] = None
) -> GridField:
    """Build a GridField from a grid file."""
    grid = read_grid(path)
    logger.info("loaded %s grid with counts %s from %s", grid.dimension, grid.counts, path)
    return GridField(grid.lower, grid.upper, grid.values, default=default, support=support)


def solution_grid(solution: GridSolution) -> GridData:
    """
    Export a node potential as a grid: the box is widened by half a spacing so
    that cell centres coincide with the solver nodes.
    """
    h = solution.spacing
    lower = tuple(float(v) - 0.5 * h for v in solution.lower)
    upper = tuple(float(v) + 0.5 * h for v in solution.upper)
    return GridData(lower, upper, np.asarray(solution.potential, dtype=float))
