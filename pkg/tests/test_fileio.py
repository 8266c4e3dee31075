"""File format tests: lossless CSV round trips, header-driven type dispatch,
line-numbered rejection of malformed input, deterministic JSON, and min-max
normalized binary PGM dumps with their sidecars."""

import json
import os

import numpy as np
import pytest

from synlearn import Dataset, SupervisedSet
from synlearn.fileio import read_csv, write_csv, write_json, write_pgm


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestCsvRoundTrip:
    # 17-significant-digit decimals reproduce doubles exactly, so the round
    # trip is bit-for-bit, stronger than the 1e-12 contract
    def test_unlabeled_dataset(self, tmp_path):
        data = Dataset(_rng(1).normal(0.0, 1.0, (20, 3)))
        path = str(tmp_path / "data.csv")
        write_csv(data, path)
        back = read_csv(path)
        assert isinstance(back, Dataset)
        assert back.labels is None
        assert np.array_equal(back.points, data.points)

    def test_labeled_dataset(self, tmp_path):
        data = Dataset(_rng(2).normal(0.0, 1.0, (12, 2)), labels=np.repeat([0, 1, 2], 4))
        path = str(tmp_path / "labeled.csv")
        write_csv(data, path)
        back = read_csv(path)
        assert np.array_equal(back.points, data.points)
        assert np.array_equal(back.labels, data.labels)
        assert back.labels.dtype.kind == "i"

    def test_supervised_set(self, tmp_path):
        data = SupervisedSet(_rng(3).normal(0.0, 1.0, (15, 2)), _rng(4).normal(0.0, 1.0, (15, 1)))
        path = str(tmp_path / "pairs.csv")
        write_csv(data, path)
        back = read_csv(path)
        assert isinstance(back, SupervisedSet)
        assert np.array_equal(back.inputs, data.inputs)
        assert np.array_equal(back.targets, data.targets)

    def test_bare_matrix_reads_as_unlabeled_dataset(self, tmp_path):
        matrix = _rng(5).normal(0.0, 1.0, (6, 4))
        path = str(tmp_path / "matrix.csv")
        write_csv(matrix, path)
        back = read_csv(path)
        assert isinstance(back, Dataset)
        assert np.array_equal(back.points, matrix)

    def test_extreme_values_survive(self, tmp_path):
        matrix = np.array([[1e-300, -1e300, np.pi, 1.0 + 2**-52]])
        path = str(tmp_path / "extreme.csv")
        write_csv(matrix, path)
        assert np.array_equal(read_csv(path).points, matrix)

    def test_header_names_follow_type(self, tmp_path):
        path = str(tmp_path / "named.csv")
        write_csv(SupervisedSet(np.zeros((3, 2)), np.zeros((3, 1))), path)
        with open(path, encoding="utf-8") as handle:
            assert handle.readline().strip() == "x0,x1,z0"

    def test_blank_lines_are_skipped(self, tmp_path):
        path = str(tmp_path / "gaps.csv")
        path_obj = tmp_path / "gaps.csv"
        path_obj.write_text("x0\n1.0\n\n2.0\n")
        back = read_csv(path)
        assert np.array_equal(back.points, np.array([[1.0], [2.0]]))


class TestCsvRejections:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="line 0: empty file"):
            read_csv(str(path))

    def test_header_only(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("x0,x1\n")
        with pytest.raises(ValueError, match="line 1: header only"):
            read_csv(str(path))

    def test_ragged_row_reports_line_number(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("x0,x1\n1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="line 3: expected 2 fields, got 1"):
            read_csv(str(path))

    def test_bad_number_reports_line_and_token(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("x0\n1.0\nabc\n")
        with pytest.raises(ValueError, match="line 3: invalid number 'abc'"):
            read_csv(str(path))

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("x0\ninf\n")
        with pytest.raises(ValueError, match="non-finite"):
            read_csv(str(path))


class TestJson:
    def test_write_is_deterministic_and_sorted(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_json({"zeta": 1, "alpha": [1, 2]}, str(a))
        write_json({"alpha": [1, 2], "zeta": 1}, str(b))
        assert a.read_bytes() == b.read_bytes()
        assert json.loads(a.read_text()) == {"zeta": 1, "alpha": [1, 2]}

    def test_ends_with_newline(self, tmp_path):
        path = tmp_path / "n.json"
        write_json({"x": 1}, str(path))
        assert path.read_bytes().endswith(b"\n")


class TestPgm:
    def test_constant_grid_maps_to_zero_bytes(self, tmp_path):
        path = str(tmp_path / "flat.pgm")
        sidecar = write_pgm(np.full((4, 6), 3.7), path)
        assert sidecar["constant"] is True
        assert sidecar["min"] == sidecar["max"] == 3.7
        raw = open(path, "rb").read()
        assert raw.startswith(b"P5\n6 4\n255\n")
        assert raw[len(b"P5\n6 4\n255\n") :] == bytes(24)

    def test_gradient_grid_spans_full_range(self, tmp_path):
        grid = np.linspace(0.0, 1.0, 256).reshape(16, 16)
        path = str(tmp_path / "ramp.pgm")
        sidecar = write_pgm(grid, path)
        body = open(path, "rb").read().split(b"255\n", 1)[1]
        levels = np.frombuffer(body, dtype=np.uint8)
        assert levels.min() == 0
        assert levels.max() == 255
        assert sidecar["min"] == 0.0
        assert sidecar["max"] == 1.0
        assert sidecar["shape"] == [16, 16]

    def test_sidecar_written_next_to_image(self, tmp_path):
        path = str(tmp_path / "grid.pgm")
        write_pgm(np.zeros((3, 3)), path)
        sidecar = json.loads(open(path + ".json", encoding="utf-8").read())
        assert sidecar["constant"] is True

    def test_rejects_non_finite_grid(self, tmp_path):
        with pytest.raises(ValueError, match="finite"):
            write_pgm(np.array([[0.0, np.nan]]), str(tmp_path / "bad.pgm"))


class TestAtomicity:
    # the temp-and-rename discipline leaves no droppings on success
    def test_no_temp_files_left_behind(self, tmp_path):
        write_csv(np.ones((3, 3)), str(tmp_path / "a.csv"))
        write_json({"k": 1}, str(tmp_path / "b.json"))
        write_pgm(np.ones((3, 3)), str(tmp_path / "c.pgm"))
        leftovers = [name for name in os.listdir(tmp_path) if name.startswith(".tmp-")]
        assert leftovers == []
