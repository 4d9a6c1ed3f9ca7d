"""Unit parsing, nanosecond conversion and CSV/JSON writers for trajectories and sweeps.

Numbers are written with 12 significant digits using ``repr``-free ``%.12g``
formatting, which is locale independent.
"""
from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

from .engine import Trajectory
from .metrics import ResetOutcome
from .sweep import Optimum, SweepGrid

IBM_STEP1_NS = 75.0

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ]*)\s*$")


def fmt(x: float) -> str:
    return "%.12g" % x


def parse_quantity(text, units=FREQ_UNITS) -> tuple[float, float | None]:
    """Split ``"10MHz"`` into ``(10.0, 1e6)``; a bare number gives ``(value, None)``."""
    if isinstance(text, (int, float)):
        return float(text), None
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValueError(f"malformed quantity {text!r}")
    value, suffix = float(m.group(1)), m.group(2)
    if not suffix:
        return value, None
    scale = units.get(suffix.lower())
    if scale is None:
        raise ValueError(f"unknown unit suffix {suffix!r} in {text!r}; expected one of {sorted(units)}")
    return value, scale


def parse_frequency_hz(text) -> float:
    """Ordinary frequency in Hz; bare numbers are taken as Hz."""
    value, scale = parse_quantity(text, FREQ_UNITS)
    return value * (scale or 1.0)


def to_nanoseconds(t_dimensionless: float, coupling_hz: float) -> float:
    """Convert ``g t`` to nanoseconds for a coupling g = 2 pi * ``coupling_hz``."""
    return t_dimensionless / (2 * math.pi * coupling_hz) * 1e9


def ns_report(model: str, t_stop: float | None, coupling_hz: float) -> dict:
    if t_stop is None:
        return {"coupling_hz": coupling_hz, "reset_ns": None}
    ns = to_nanoseconds(t_stop, coupling_hz)
    if model == "ibm":
        return {"coupling_hz": coupling_hz, "step1_ns": IBM_STEP1_NS, "step2_ns": ns,
                "total_ns": IBM_STEP1_NS + ns}
    return {"coupling_hz": coupling_hz, "reset_ns": ns}


def outcome_record(o: ResetOutcome) -> dict:
    rec = {"status": o.status, "t_stop": o.t_stop}
    if o.message:
        rec["message"] = o.message
    return rec


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "pg"])
        for t, p in zip(traj.times, traj.pg):
            w.writerow([fmt(t), fmt(p)])


def read_trajectory_csv(path) -> tuple[list[float], list[float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "pg"]:
        raise ValueError(f"unexpected trajectory header {rows[0]}")
    return [float(r[0]) for r in rows[1:]], [float(r[1]) for r in rows[1:]]


def write_sweep_csv(path, grid: SweepGrid) -> None:
    """One row per cell: axis values, ``t_stop`` (empty unless ok) and ``status``."""
    names = [ax.name for ax in grid.axes]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["t_stop", "status"])
        for params, cell in zip(grid.points(), grid.cells):
            w.writerow([fmt(params[n]) for n in names]
                       + [fmt(cell.t_stop) if cell.finite else "", cell.status])


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            rec = {k: (float(v) if k not in ("status", "t_stop") else v) for k, v in row.items()}
            rec["t_stop"] = float(row["t_stop"]) if row["t_stop"] else None
            out.append(rec)
    return out


def optimum_record(opt: Optimum | None) -> dict | None:
    if opt is None:
        return None
    return {"params": dict(opt.params), "t_stop": opt.t_stop}


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
