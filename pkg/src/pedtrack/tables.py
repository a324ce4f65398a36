"""Comma-separated text formats for databases, reports and control points.

Floats are written with ``repr`` so a write/read cycle is lossless.
Lines starting with ``#`` are comments (used for provenance).
"""
from __future__ import annotations

import csv
from pathlib import Path

from .calibration import Calibration
from .detection import FEATURE_FIELDS, FeatureRow
from .synth import GroundTruth
from .tracking import NtxyRecord

DATABASE_HEADER = (
    "SlcObjNum", "PedNum", "sliceNum", "cg_Area_X", "cg_Area_Y", "Area",
    "Width", "Height", "Perimeter", "Compactness",
    "Mean_R", "Mean_G", "Mean_B", "Std_R", "Std_G", "Std_B",
    "Skewness", "Kurtosis", "cg_Color_X", "cg_Color_Y",
)
# column -> FeatureRow attribute
_DB_COLUMNS = dict(zip(DATABASE_HEADER, (
    "slice_object_number", "pedestrian_number", "slice_number", "cg_area_x", "cg_area_y", "area",
    "width", "height", "perimeter", "compactness",
    "mean_r", "mean_g", "mean_b", "std_r", "std_g", "std_b",
    "skewness", "kurtosis", "cg_color_x", "cg_color_y",
)))
assert set(_DB_COLUMNS.values()) == set(FEATURE_FIELDS)
_INT_ATTRS = {"slice_object_number", "pedestrian_number", "slice_number"}

NTXY_HEADER = ("PedNum", "T", "X", "Y")


class TableError(ValueError):
    pass


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_table(path, header, rows, comments=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(line if line.startswith("#") else "# " + line)
            fh.write("\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read(path, expected_header):
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise TableError(f"{path}: cannot read ({exc.strerror})") from exc
    if not lines:
        raise TableError(f"{path}: missing header")
    reader = csv.reader(lines, skipinitialspace=True)
    header = [h.strip() for h in next(reader)]
    if tuple(header[: len(expected_header)]) != tuple(expected_header):
        raise TableError(f"{path}: unexpected header {header}")
    return header, list(reader)


def write_database(path, rows, comments=()) -> None:
    attrs = [_DB_COLUMNS[c] for c in DATABASE_HEADER]
    write_table(path, DATABASE_HEADER, ([getattr(r, a) for a in attrs] for r in rows), comments)


def read_database(path) -> list[FeatureRow]:
    header, body = _read(path, DATABASE_HEADER)
    rows = []
    for lineno, values in enumerate(body, start=2):
        if len(values) != len(header):
            raise TableError(f"{path}: row {lineno} has {len(values)} fields, expected {len(header)}")
        kwargs = {}
        for col, val in zip(header, values):
            attr = _DB_COLUMNS[col]
            kwargs[attr] = int(val) if attr in _INT_ATTRS else float(val)
        rows.append(FeatureRow(**kwargs))
    return rows


def write_ntxy(path, records, comments=()) -> None:
    write_table(path, NTXY_HEADER, ((r.pedestrian_number, r.time, float(r.x), float(r.y)) for r in records), comments)


def read_ntxy(path) -> list[NtxyRecord]:
    _, body = _read(path, NTXY_HEADER)
    try:
        return [NtxyRecord(int(p), int(t), float(x), float(y)) for p, t, x, y in body]
    except ValueError as exc:
        raise TableError(f"{path}: {exc}") from exc


def read_control_points(path):
    """``Xi, Yi, Xr, Yr`` rows as ``[((xi, yi), (xr, yr)), ...]``."""
    _, body = _read(path, ("Xi", "Yi", "Xr", "Yr"))
    try:
        return [((float(a), float(b)), (float(c), float(d))) for a, b, c, d in body]
    except ValueError as exc:
        raise TableError(f"{path}: {exc}") from exc


_CAL_KEYS = ("u", "v", "w", "x0", "y0", "z0", "fit_residual")


def write_calibration(path, cal: Calibration, comments=()) -> None:
    write_table(path, ("key", "value"), ((k, float(getattr(cal, k))) for k in _CAL_KEYS), comments)


def read_calibration(path) -> Calibration:
    """Read either fitted coefficients or a control-point file (fitted on the fly)."""
    from .calibration import fit_calibration

    path = Path(path)
    try:
        with open(path) as fh:
            first = next((ln for ln in fh if ln.strip() and not ln.startswith("#")), "")
    except OSError as exc:
        raise TableError(f"{path}: cannot read ({exc.strerror})") from exc
    if first.replace(" ", "").startswith("Xi,"):
        return fit_calibration(read_control_points(path))
    _, body = _read(path, ("key", "value"))
    values = {k.strip(): float(v) for k, v in body}
    missing = [k for k in _CAL_KEYS[:6] if k not in values]
    if missing:
        raise TableError(f"{path}: missing coefficients {missing}")
    return Calibration(**{k: values.get(k, 0.0) for k in _CAL_KEYS})


def write_truth(path, truth: GroundTruth, comments=()) -> None:
    write_table(path, ("Actor", "T", "X", "Y", "Visible"), truth.rows(), comments)


def read_truth(path) -> GroundTruth:
    _, body = _read(path, ("Actor", "T", "X", "Y", "Visible"))
    positions, visible = {}, {}
    for a, t, x, y, vis in body:
        a, t = int(a), int(t)
        positions.setdefault(a, {})[t] = (float(x), float(y))
        visible.setdefault(a, set())
        if int(vis):
            visible[a].add(t)
    return GroundTruth(positions, visible)


def write_key_values(path, items, comments=()) -> None:
    write_table(path, ("key", "value"), items, comments)


def _opt(value):
    return "" if value is None else value


def write_flow_report(path, report, comments=()) -> None:
    """Summary key/value block, a blank line, then the per-pedestrian table."""
    summary = [
        ("T1", report.t1), ("T2", report.t2), ("kappa", report.kappa),
        ("flow_rate", report.flow_rate),
        ("time_mean_speed", _opt(report.time_mean_speed)),
        ("space_mean_speed", _opt(report.space_mean_speed)),
        ("stationary", report.stationary),
        ("area_module", _opt(report.area_module)),
        ("density", _opt(report.density)),
        ("line_crossings", report.line_crossings),
    ]
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write((line if line.startswith("#") else "# " + line) + "\n")
        fh.write("key,value\n")
        for k, v in summary:
            fh.write(f"{k},{_fmt(v)}\n")
        fh.write("\n")
        fh.write("PedNum,T_i,T_o,rho,speed,e_x,e_y,headway_count,min_headway\n")
        for p in report.pedestrians:
            ex, ey = p.direction if p.direction else ("", "")
            hmin = min(h for _, h in p.headways) if p.headways else ""
            fields = (p.pedestrian_number, p.t_in, p.t_out, p.rho, p.speed, ex, ey, len(p.headways), hmin)
            fh.write(",".join(_fmt(v) for v in fields) + "\n")


def read_flow_summary(path) -> dict[str, str]:
    """The key/value summary block of a flow report."""
    out = {}
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if not ln.startswith("#")]
    for line in lines[1:]:
        if not line:
            break
        k, v = line.split(",", 1)
        out[k] = v
    return out
