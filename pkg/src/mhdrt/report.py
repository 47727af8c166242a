"""Serialization of sweeps and trajectories: CSV, JSON reports and SVG plots.

Everything written here is a pure function of its inputs. Floats go out with
17 significant digits, JSON keys keep insertion order, and the SVG writer
pins the id salt and drops the timestamp, so identical runs produce
identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .evolve import ModeTrajectory
from .growth import DispersionCurve

CSV_HEADER = ("xi1", "xi2", "xi_mag", "status", "lambda", "s_star", "psi0", "iterations")
TRAJECTORY_HEADER = ("t", "energy", "dissipation", "norm")
SCHEMA = "mhd-rt/1"
SAMPLES_GID = "samples"


class ReportError(ValueError):
    pass


def format_float(x: float) -> str:
    """17 significant digits, always readable back as the same float."""
    s = format(float(x), ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return format_float(x)
    return str(x)


def dispersion_rows(curve: DispersionCurve) -> list[list[str]]:
    rows = []
    for r in curve.samples:
        unstable = r.unstable
        rows.append([_cell(r.xi.xi1), _cell(r.xi.xi2), _cell(r.xi.mag), r.status.value,
                     _cell(r.lam if unstable else None),
                     _cell(r.s_star if unstable else None),
                     _cell(r.psi0() if unstable else None),
                     str(r.iterations)])
    return rows


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_dispersion_csv(curve: DispersionCurve, path) -> None:
    _write_csv(path, CSV_HEADER, dispersion_rows(curve))


def write_trajectory_csv(traj: ModeTrajectory, path) -> None:
    norms = traj.norms()
    rows = [[_cell(t), _cell(e), _cell(d), _cell(n)]
            for t, e, d, n in zip(traj.times, traj.energy, traj.dissipation, norms)]
    _write_csv(path, TRAJECTORY_HEADER, rows)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no inf/nan; they are written as null
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def curve_records(curve: DispersionCurve) -> list[dict]:
    out = []
    for r in curve.samples:
        rec = {"xi1": r.xi.xi1, "xi2": r.xi.xi2, "xi_mag": r.xi.mag,
               "status": r.status.value}
        if r.unstable:
            rec.update({"lambda": r.lam, "s_star": r.s_star, "psi0": r.psi0(),
                        "phi_residual": r.phi_residual,
                        "pencil_residual": r.pencil_residual})
        rec["iterations"] = r.iterations
        if r.error is not None:
            rec["error"] = r.error
        out.append(rec)
    return out


def write_report(results: dict, path) -> None:
    """JSON report; ``results`` is an ordered mapping that must not be empty.

    The schema tag is prepended and ``lambda_max`` is derived from the
    ``samples`` list when one is present.
    """
    if not results:
        raise ReportError("nothing to report")
    doc = {"schema": SCHEMA}
    doc.update(results)
    samples = doc.get("samples")
    if samples is not None and "lambda_max" not in doc:
        rates = [s["lambda"] for s in samples if s.get("lambda") is not None]
        doc["lambda_max"] = max(rates) if rates else None
    text = dumps(doc)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _save_svg(fig: Figure, path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "mhdrt", "svg.fonttype": "none"}):
        FigureCanvasSVG(fig)
        fig.savefig(path, format="svg", metadata={"Date": None})


def plot_dispersion(curve: DispersionCurve, path, critical: float | None = None,
                    bound: float | None = None, title: str | None = None) -> None:
    """Growth rate against |xi|, one marker per sample (stable ones at zero).

    The sample markers live under the SVG group ``samples`` so the plotted
    count can be checked against the CSV.
    """
    xi, lam = curve.arrays()
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot()
    line, = ax.plot(xi, lam, marker="o", markersize=3.5, linewidth=1.0, color="C0",
                    label=r"$\lambda(|\xi|)$")
    line.set_gid(SAMPLES_GID)
    if critical is not None and math.isfinite(critical):
        ax.axvline(critical, color="C3", linestyle="--", linewidth=0.8,
                   label="critical frequency")
    if bound is not None and math.isfinite(bound) and bound <= 2 * max(lam.max(), 1e-300):
        ax.axhline(bound, color="0.4", linestyle=":", linewidth=0.8, label="growth bound")
    ax.set_xlabel(r"$|\xi|$")
    ax.set_ylabel("growth rate")
    if len(xi) > 1 and xi.min() > 0 and xi.max() / xi.min() > 50:
        ax.set_xscale("log")
    ax.set_title(title or f"{curve.orientation.value} field, |B| = {curve.mag.magnitude:g}")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    _save_svg(fig, path)


def plot_energy(traj: ModeTrajectory, path, title: str | None = None) -> None:
    fig = Figure(figsize=(6.4, 5.6))
    top, bottom = fig.subplots(2, 1, sharex=True)
    top.plot(traj.times, traj.energy, color="C0", linewidth=1.0, label="energy")
    top.plot(traj.times, traj.dissipation, color="C1", linewidth=1.0, label="dissipation")
    top.legend(loc="best", fontsize="small")
    top.set_ylabel("energy")
    norms = traj.norms()
    pos = norms > 0
    bottom.semilogy(traj.times[pos], norms[pos], color="C2", linewidth=1.0)
    bottom.set_ylabel("displacement norm")
    bottom.set_xlabel("t")
    if title:
        top.set_title(title)
    fig.tight_layout()
    _save_svg(fig, path)


def count_svg_markers(path, gid: str = SAMPLES_GID) -> int:
    """Number of marker instances drawn under the group ``gid``."""
    import xml.etree.ElementTree as ET

    ns = "{http://www.w3.org/2000/svg}"
    root = ET.parse(path).getroot()
    for g in root.iter(ns + "g"):
        if g.get("id") == gid:
            return sum(1 for _ in g.iter(ns + "use"))
    raise ReportError(f"no group {gid!r} in {os.fspath(path)}")
