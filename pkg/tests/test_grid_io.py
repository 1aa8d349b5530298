"""
Unit tests for grid file ingestion and export

Run with: pytest tests/test_grid_io.py -v
"""

import struct

import numpy as np
import pytest

from ringbound.exceptions import GridFormatError, ValidationError
from ringbound.models.fields import GridField
from ringbound.models.results import GridSolution
from ringbound.utils.grid_io import (
    BINARY_MAGIC,
    TEXT_HEADER,
    GridData,
    load_grid_field,
    read_grid,
    render_text,
    solution_grid,
    write_grid,
)

SAMPLE_TEXT = """# ringbound grid v1
dimension 2
lower 0 0
upper 1 2
counts 2 3
values
1 2 3
4 5 6
"""


@pytest.fixture
def sample(tmp_path):
    path = tmp_path / "field.grid"
    path.write_text(SAMPLE_TEXT)
    return path


class TestTextGrids:
    """Tests for the text form"""

    def test_read(self, sample):
        grid = read_grid(sample)
        assert grid.dimension == 2
        assert grid.counts == (2, 3)
        assert grid.upper == (1.0, 2.0)
        assert grid.values[1, 2] == 6.0

    def test_render_layout(self):
        grid = GridData((0.0,), (1.0,), np.array([0.5, 1.25]))
        assert render_text(grid) == (
            f"{TEXT_HEADER}\ndimension 1\nlower 0\nupper 1\ncounts 2\nvalues\n0.5 1.25\n"
        )

    def test_rewrite_preserves_samples(self, sample, tmp_path):
        grid = read_grid(sample)
        target = write_grid(tmp_path / "copy.grid", grid)
        assert np.array_equal(read_grid(target).values, grid.values)

    def test_comments_in_header_are_skipped(self, tmp_path):
        path = tmp_path / "commented.grid"
        path.write_text(SAMPLE_TEXT.replace("dimension 2", "# exported by hand\ndimension 2"))
        assert read_grid(path).counts == (2, 3)

    @pytest.mark.parametrize(
        "text, message",
        [
            (SAMPLE_TEXT.replace(TEXT_HEADER, "# some grid"), "header"),
            (SAMPLE_TEXT.replace("counts 2 3", "shape 2 3"), "unknown header key"),
            (SAMPLE_TEXT.split("values")[0], "no .values. line"),
            (SAMPLE_TEXT.replace("4 5 6", "4 5"), "expected 6 values"),
            (SAMPLE_TEXT.replace("upper 1 2", "upper 0 2"), "lower < upper"),
            (SAMPLE_TEXT.replace("4 5 6", "4 -5 6"), "nonnegative"),
            (SAMPLE_TEXT.replace("4 5 6", "4 five 6"), "malformed"),
            (SAMPLE_TEXT.replace("lower 0 0\n", ""), "missing"),
        ],
        ids=["header", "key", "values-line", "count", "extents", "negative", "number",
             "missing-key"],
    )
    def test_malformed(self, tmp_path, text, message):
        path = tmp_path / "bad.grid"
        path.write_text(text)
        with pytest.raises(GridFormatError, match=message):
            read_grid(path)

    def test_format_error_is_validation_error(self, tmp_path):
        path = tmp_path / "bad.grid"
        path.write_text("nothing here\n")
        with pytest.raises(ValidationError):
            read_grid(path)


class TestBinaryGrids:
    """Tests for the binary form"""

    def test_layout(self, sample, tmp_path):
        target = write_grid(tmp_path / "field.bin", read_grid(sample), binary=True)
        blob = target.read_bytes()
        assert blob.startswith(BINARY_MAGIC)
        (n,) = struct.unpack_from("<I", blob, len(BINARY_MAGIC))
        assert n == 2
        assert len(blob) == len(BINARY_MAGIC) + 4 + 3 * 8 * 2 + 8 * 6
        assert np.array_equal(read_grid(target).values, read_grid(sample).values)

    def test_truncated(self, sample, tmp_path):
        target = write_grid(tmp_path / "field.bin", read_grid(sample), binary=True)
        target.write_bytes(target.read_bytes()[:-8])
        with pytest.raises(GridFormatError, match="expected 6 float64 values"):
            read_grid(target)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.bin"
        path.write_bytes(BINARY_MAGIC + b"\x02\x00")
        with pytest.raises(GridFormatError, match="truncated"):
            read_grid(path)


class TestGridFields:
    """Tests for load_grid_field and solution export"""

    def test_load_field(self, sample, rb):
        field = load_grid_field(sample, default=0.0)
        # cell centres sit at x = 0.25, 0.75 and y = 1/3, 1, 5/3
        assert rb.eval_field(field, (0.25, 1.0)) == pytest.approx(2.0)
        assert rb.eval_field(field, (5.0, 5.0)) == 0.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_grid(tmp_path / "absent.grid")

    def test_solution_export_aligns_nodes(self, rb):
        potential = np.linspace(0.0, 1.0, 9).reshape(3, 3)
        solution = GridSolution(
            resolution=2,
            lower=(0.0, 0.0),
            upper=(2.0, 2.0),
            potential=potential,
            energy=1.0,
            iterations=1,
            residual=0.0,
            converged=True,
        )
        grid = solution_grid(solution)
        assert grid.lower == (-0.5, -0.5)
        assert grid.upper == (2.5, 2.5)
        as_field = GridField(grid.lower, grid.upper, grid.values)
        assert rb.eval_field(as_field, (1.0, 2.0)) == pytest.approx(potential[1, 2])
