"""Serialization: 17-digit round trips, CSV/SVG structure, manifests."""

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lrdual import SmoothingSequence, ValidationError, coefficient_matrix, coefficients_at
from lrdual.fileio import (
    RunManifest,
    fmt17,
    read_multipliers,
    read_points,
    read_target_profile,
    svg_line_plot,
    write_coefficient_matrix_csv,
    write_coefficients_csv,
    write_schedule_csv,
)


class TestFmt17:
    def test_round_trips_doubles(self):
        rng = np.random.default_rng(0)
        values = list(10.0 ** rng.uniform(-300, 300, 200) * rng.choice([-1, 1], 200))
        values += [0.0, 1.0, 2e-3, 5e-324, 1.7976931348623157e308]
        for v in values:
            assert float(fmt17(v)) == v

    def test_infinity(self):
        assert fmt17(float("-inf")) == "-inf"
        assert float(fmt17(float("-inf"))) == float("-inf")


class TestScheduleCsv:
    def test_write_and_reparse(self, tmp_path):
        path = tmp_path / "schedule.csv"
        lrs = np.array([0.1, 0.2, 0.05])
        alphas = lrs * 0.1
        write_schedule_csv(path, lrs, alphas)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,lr,alpha"
        assert len(lines) == 4
        for idx, line in enumerate(lines[1:]):
            step, lr, alpha = line.split(",")
            assert int(step) == idx + 1
            assert float(lr) == lrs[idx]
            assert float(alpha) == alphas[idx]


class TestCoefficientsCsv:
    def test_zero_coefficient_serializes(self, tmp_path):
        coeffs = coefficients_at(SmoothingSequence(np.array([1.0, 0.0, 0.5])))
        path = tmp_path / "coefficients.csv"
        write_coefficients_csv(path, coeffs)
        rows = path.read_text().splitlines()
        assert rows[0] == "i,c,log_c"
        i, c, log_c = rows[2].split(",")
        assert (i, float(c), float(log_c)) == ("2", 0.0, float("-inf"))

    def test_matrix_sparse_omits_underflow(self, tmp_path):
        alphas = SmoothingSequence(np.concatenate([[1.0], np.full(2500, 0.5)]))
        table = coefficient_matrix(alphas)
        path = tmp_path / "matrix.csv"
        write_coefficient_matrix_csv(path, table)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == "t,i,log_c"
        data = [line.split(",") for line in lines[2:]]
        assert all(float(log_c) >= -745.0 for _, _, log_c in data)
        # early inputs of late rows underflow and must be absent
        last_row = [(int(t), int(i)) for t, i, _ in data if int(t) == 2501]
        assert (2501, 1) not in last_row
        assert (2501, 2501) in last_row


class TestReaders:
    def test_profile_round_trip(self, tmp_path):
        path = tmp_path / "profile.csv"
        path.write_text("i,c\n3,0.5\n1,0.25\n2,0.25\n")
        profile = read_target_profile(path)
        assert profile.weights.tolist() == [0.25, 0.25, 0.5]

    def test_profile_requires_contiguous_indices(self, tmp_path):
        path = tmp_path / "profile.csv"
        path.write_text("i,c\n1,0.5\n3,0.5\n")
        with pytest.raises(ValidationError):
            read_target_profile(path)

    def test_points(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("x,y\n1,4\n4,2\n")
        assert read_points(path) == [(1.0, 4.0), (4.0, 2.0)]

    def test_points_malformed(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("x,y\n1,spam\n")
        with pytest.raises(ValidationError):
            read_points(path)

    def test_multipliers(self, tmp_path):
        path = tmp_path / "mult.txt"
        path.write_text("# comment\n1.0\n0.5\n\n0.25\n")
        assert read_multipliers(path) == (1.0, 0.5, 0.25)


class TestSvg:
    def test_valid_xml_one_polyline_per_series(self):
        xs = np.arange(1, 21)
        svg = svg_line_plot(
            [("a", xs, xs * 0.1), ("b", xs, xs * 0.2)],
            title="two series",
            x_label="step",
            y_label="lr",
        )
        root = ET.fromstring(svg)
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        assert len(polylines) == 2

    def test_log_axis_drops_nonpositive(self):
        xs = np.arange(1, 6)
        ys = np.array([1.0, 0.1, 0.0, 0.01, 1e-3])
        svg = svg_line_plot(
            [("c", xs, ys)], title="t", x_label="x", y_label="y", log_y=True
        )
        root = ET.fromstring(svg)
        polyline = root.findall(".//{http://www.w3.org/2000/svg}polyline")[0]
        assert len(polyline.attrib["points"].split()) == 4

    def test_empty_series_rejected(self):
        with pytest.raises(ValidationError):
            svg_line_plot([], title="t", x_label="x", y_label="y")


class TestManifest:
    def test_round_trip_and_stable_bytes(self, tmp_path):
        manifest = RunManifest(
            command="schedule",
            argv=["schedule", "--steps", "10"],
            config={"steps": 10, "kind": "linear"},
            version="0.1.0",
            base_seed=3,
            outputs=["schedule.csv"],
        )
        p1 = manifest.write(tmp_path)
        first = p1.read_bytes()
        p2 = manifest.write(tmp_path)
        assert p2.read_bytes() == first
        loaded = RunManifest.load(p1)
        assert loaded.command == "schedule"
        assert loaded.argv == ["schedule", "--steps", "10"]
        assert loaded.outputs == ["schedule.csv"]
        payload = json.loads(first)
        assert sorted(payload) == [
            "argv",
            "base_seed",
            "command",
            "config",
            "outputs",
            "version",
        ]
