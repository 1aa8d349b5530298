"""
Unit tests for the table, manifest and JSON writers

Run with: pytest tests/test_output.py -v
"""

import json
import math
from unittest.mock import patch

import numpy as np
import pytest

from ringbound.utils.output import (
    atomic_write,
    format_value,
    render_table,
    write_json,
    write_manifest,
    write_table,
)


class TestFormatValue:
    """Tests for format_value"""

    @pytest.mark.parametrize(
        "value, expected",
        [
            (None, ""),
            (True, "true"),
            (np.bool_(False), "false"),
            (3, "3"),
            (np.int64(7), "7"),
            (0.1, "0.1"),
            (math.pi, "3.14159265358979"),
            (1e-300, "1e-300"),
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
            ([1.5, 2], "1.5 2"),
            ("text", "text"),
        ],
    )
    def test_rendering(self, value, expected):
        assert format_value(value) == expected


class TestTables:
    """Tests for render_table and write_table"""

    def test_meta_lines_then_header(self):
        text = render_table(["epsilon", "bound"], [(0.5, math.inf)], {"sigma": 1.0})
        assert text == "# sigma: 1\nepsilon,bound\n0.5,inf\n"

    def test_write_table(self, tmp_path):
        path = write_table(tmp_path / "nested" / "t.csv", ["a"], [(1,), (2,)])
        assert path.read_text() == "a\n1\n2\n"

    def test_manifest(self, tmp_path):
        path = write_manifest(tmp_path / "manifest.txt", {"task": "ring-bound", "seed": 0})
        assert path.read_text() == "task = ring-bound\nseed = 0\n"


class TestAtomicWrite:
    """Tests for atomic_write"""

    def test_replaces_existing_file(self, tmp_path):
        target = tmp_path / "out.txt"
        target.write_text("old")
        atomic_write(target, "new")
        assert target.read_text() == "new"
        assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]

    def test_bytes(self, tmp_path):
        target = atomic_write(tmp_path / "blob.bin", b"\x00\x01")
        assert target.read_bytes() == b"\x00\x01"

    def test_failure_leaves_no_partial_file(self, tmp_path):
        target = tmp_path / "out.txt"
        with patch("ringbound.utils.output.os.replace", side_effect=OSError("disk full")):
            with pytest.raises(OSError, match="disk full"):
                atomic_write(target, "data")
        assert list(tmp_path.iterdir()) == []


class TestJson:
    """Tests for write_json"""

    def test_sorted_keys_and_non_finite(self, tmp_path):
        path = write_json(
            tmp_path / "summary.json",
            {"b": np.float64(math.inf), "a": [np.int32(1), 0.5], "c": {"ok": np.bool_(True)}},
        )
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1, 0.5], "b": "inf", "c": {"ok": True}}
