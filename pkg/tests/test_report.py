import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mhdrt import (
    FluidParams,
    Frequency,
    MagneticConfig,
    Orientation,
    dispersion_sweep,
    evolve_mode,
)
from mhdrt.report import (
    CSV_HEADER,
    TRAJECTORY_HEADER,
    SCHEMA,
    ReportError,
    count_svg_markers,
    curve_records,
    dumps,
    format_float,
    plot_dispersion,
    plot_energy,
    read_report,
    write_dispersion_csv,
    write_report,
    write_trajectory_csv,
)

BASE = FluidParams(2.0, 1.0, 0.1, 0.1, 1.0)
VERT = MagneticConfig(Orientation.VERTICAL, 0.5)


@pytest.fixture(scope="module")
def curve(hermite16):
    return dispersion_sweep(BASE, VERT, [2.0, 4.0, 6.0, 10.0, 16.0], hermite16)


@pytest.mark.parametrize("x", [0.1, 1.0, -3.0, 1e-300, 2.0 / 3.0, 12345678901234567.0])
def test_float_format_round_trips(x):
    text = format_float(x)
    assert float(text) == x
    assert "." in text or "e" in text


def test_dispersion_csv(curve, tmp_path):
    path = tmp_path / "d.csv"
    write_dispersion_csv(curve, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + len(curve.samples)
    stable = lines[1].split(",")
    assert stable[3] == "stable" and stable[4] == ""
    last = lines[-1].split(",")
    assert last[3] == "unstable" and float(last[4]) == curve.samples[-1].lam


def test_trajectory_csv(hermite16, tmp_path):
    z = np.zeros(hermite16.dof_count)
    z[3] = 1.0
    traj = evolve_mode(BASE, VERT, Frequency(2.0), hermite16, (z, z), 0.1, 0.5)
    path = tmp_path / "t.csv"
    write_trajectory_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRAJECTORY_HEADER)
    assert len(lines) == len(traj.times) + 1
    assert float(lines[2].split(",")[1]) == traj.energy[1]


def test_report_round_trip(curve, tmp_path):
    path = tmp_path / "r.json"
    samples = curve_records(curve)
    write_report({"config": {"B": 0.5, "n": 16}, "samples": samples}, path)
    doc = read_report(path)
    assert list(doc) == ["schema", "config", "samples", "lambda_max"]
    assert doc["schema"] == SCHEMA
    assert doc["lambda_max"] == curve.lambda_max
    assert doc["samples"][-1]["lambda"] == curve.samples[-1].lam
    assert "lambda" not in doc["samples"][0]


def test_empty_report_rejected(tmp_path):
    with pytest.raises(ReportError):
        write_report({}, tmp_path / "r.json")


def test_nonfinite_values_become_null():
    assert json.loads(dumps({"a": math.inf, "b": [math.nan, 1.5], "c": np.float64(2.0)})) == \
        {"a": None, "b": [None, 1.5], "c": 2.0}
    with pytest.raises(TypeError):
        dumps({"a": object()})


def test_plot_markers_match_csv_rows(curve, tmp_path):
    svg, csv = tmp_path / "d.svg", tmp_path / "d.csv"
    plot_dispersion(curve, svg, critical=1.9, bound=3.36)
    write_dispersion_csv(curve, csv)
    ET.parse(svg)
    rows = len(csv.read_text().splitlines()) - 1
    assert count_svg_markers(svg) == rows


def test_plots_are_deterministic(curve, hermite16, tmp_path):
    for name in ("a", "b"):
        plot_dispersion(curve, tmp_path / f"{name}.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    z = np.zeros(hermite16.dof_count)
    z[5] = 1.0
    traj = evolve_mode(BASE, VERT, Frequency(2.0), hermite16, (z, z), 0.1, 1.0)
    for name in ("c", "d"):
        plot_energy(traj, tmp_path / f"{name}.svg", title="energy")
    assert (tmp_path / "c.svg").read_bytes() == (tmp_path / "d.svg").read_bytes()
    with pytest.raises(ReportError):
        count_svg_markers(tmp_path / "c.svg")
