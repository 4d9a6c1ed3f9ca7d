"""Reset-completion detection under the pulsed and steady-state criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import (DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_SAMPLE_DT, IntegrationError, Trajectory,
                     _expect, integrate, propagate)

PULSED = "pulsed"
STEADY = "steady"
APPROACHES = (PULSED, STEADY)

OK = "ok"
UNRESET = "unreset"
ERROR = "error"

DEFAULT_THRESHOLD = 0.98
DEFAULT_HORIZON = 400.0
TIME_TOL = 1e-4
# a local extremum this close to the threshold counts as touching it
GRAZE_TOL = 1e-9


@dataclass(frozen=True)
class ResetOutcome:
    status: str
    approach: str
    threshold: float
    t_stop: float | None = None
    message: str = ""

    @property
    def finite(self) -> bool:
        return self.status == OK

    @property
    def sort_key(self) -> float:
        return self.t_stop if self.finite else math.inf


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")


def _bisect(traj: Trajectory, i: int, level: float, tol: float) -> float:
    """Time in (times[i], times[i+1]] where pg rises through ``level``."""
    a, b = float(traj.times[i]), float(traj.times[i + 1])
    if traj.model is None:
        pa, pb = traj.pg[i], traj.pg[i + 1]
        return a + (b - a) * (level - pa) / (pb - pa)
    y = traj.state_at(i)
    while b - a > tol:
        m = 0.5 * (a + b)
        pm, ym = _pg_after(traj, y, a, m)
        if pm >= level:
            b = m
        else:
            a, y = m, ym
    return 0.5 * (a + b)


def _pg_after(traj, y, a, m):
    ym = propagate(traj.model, y, a, m, atol=traj.atol, rtol=traj.rtol)
    return _expect(traj.model.ground_projector.data, ym), ym


def detect_pulsed(traj: Trajectory, threshold: float = DEFAULT_THRESHOLD, *,
                  tol: float = TIME_TOL) -> ResetOutcome:
    """First time the ground population reaches ``threshold``."""
    _check_threshold(threshold)
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    level = threshold - GRAZE_TOL
    hits = np.nonzero(traj.pg >= level)[0]
    if len(hits) == 0:
        return ResetOutcome(UNRESET, PULSED, threshold)
    i = int(hits[0])
    t = float(traj.times[0]) if i == 0 else _bisect(traj, i - 1, level, tol)
    return ResetOutcome(OK, PULSED, threshold, t)


def detect_steady(traj: Trajectory, threshold: float = DEFAULT_THRESHOLD,
                  horizon: float | None = None, *, tol: float = TIME_TOL) -> ResetOutcome:
    """Earliest time after which the population stays at or above ``threshold`` up to ``horizon``."""
    _check_threshold(threshold)
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    horizon = traj.t_end if horizon is None else float(horizon)
    certified = traj.settled and traj.settle_threshold is not None and threshold <= traj.settle_threshold
    if not certified and traj.times[-1] < horizon - 1e-9:
        raise ValueError(
            f"trajectory ends at t={traj.times[-1]:.6g}, before the horizon {horizon:.6g}")
    keep = traj.times <= horizon + 1e-9
    pg = traj.pg[keep]
    level = threshold - GRAZE_TOL
    below = np.nonzero(pg < level)[0]
    if len(below) == 0:
        return ResetOutcome(OK, STEADY, threshold, float(traj.times[0]))
    j = int(below[-1])
    if j == len(pg) - 1:
        return ResetOutcome(UNRESET, STEADY, threshold)
    return ResetOutcome(OK, STEADY, threshold, _bisect(traj, j, level, tol))


def detect(traj: Trajectory, approach: str, threshold: float = DEFAULT_THRESHOLD,
           horizon: float | None = None) -> ResetOutcome:
    if approach == PULSED:
        return detect_pulsed(traj, threshold)
    if approach == STEADY:
        return detect_steady(traj, threshold, horizon)
    raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")


def reset_time(model, approach: str, threshold: float = DEFAULT_THRESHOLD,
               horizon: float = DEFAULT_HORIZON, *, sample_dt: float = DEFAULT_SAMPLE_DT,
               atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL) -> ResetOutcome:
    """Integrate ``model`` only as far as needed to decide its reset outcome.

    Pulsed runs halt at the first sample reaching the threshold; steady runs
    halt early when the model's excitation bound certifies there is no later
    recurrence. Integrator failures become ``error`` outcomes.
    """
    _check_threshold(threshold)
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")
    kwargs = dict(sample_dt=sample_dt, atol=atol, rtol=rtol)
    try:
        if approach == PULSED:
            traj = integrate(model, horizon, stop_level=threshold - GRAZE_TOL, **kwargs)
        else:
            settle = threshold if model.excitation is not None else None
            traj = integrate(model, horizon, settle_threshold=settle, **kwargs)
        return detect(traj, approach, threshold, horizon)
    except IntegrationError as exc:
        return ResetOutcome(ERROR, approach, threshold, message=str(exc))
