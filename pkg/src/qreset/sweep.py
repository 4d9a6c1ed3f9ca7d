"""Reset time over 1-D and 2-D parameter grids, with optimum location and refinement."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_SAMPLE_DT
from .metrics import DEFAULT_HORIZON, DEFAULT_THRESHOLD, ResetOutcome, reset_time
from .models import IbmParams, ModelSpec, build_ibm, build_two_qubit, build_two_qubit_cavity

MODEL_PARAMS = {
    "two_qubit": ("gamma", "g"),
    "two_qubit_cavity": ("lambda", "kappa", "n_cavity", "g"),
    "ibm": ("omega", "omega_2pi", "kappa", "alpha", "delta_q", "delta_c", "gtilde",
            "n_transmon", "n_cavity", "alpha_sign"),
}
INTEGER_PARAMS = {"n_cavity", "n_transmon", "alpha_sign"}


@dataclass(frozen=True)
class ModelFamily:
    """A model builder with some parameters held fixed; picklable for worker pools.

    For the ``ibm`` family ``omega_2pi`` is the drive amplitude divided by
    2*pi, matching sweeps quoted as Omega / (2 pi g).
    """

    model: str
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODEL_PARAMS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {sorted(MODEL_PARAMS)}")
        self.check_names(self.fixed)

    def check_names(self, names) -> None:
        unknown = set(names) - set(MODEL_PARAMS[self.model])
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for model {self.model!r}; "
                             f"expected {list(MODEL_PARAMS[self.model])}")

    def build(self, **params) -> ModelSpec:
        p = {**self.fixed, **params}
        self.check_names(p)
        for k in INTEGER_PARAMS & p.keys():
            p[k] = int(round(p[k]))
        if self.model == "two_qubit":
            return build_two_qubit(p.get("gamma", 0.0), g=p.get("g", 1.0))
        if self.model == "two_qubit_cavity":
            return build_two_qubit_cavity(p.get("lambda", 0.0), p.get("kappa", 0.0),
                                          n_cavity=p.get("n_cavity", 1), g=p.get("g", 1.0))
        if "omega_2pi" in p:
            if "omega" in p:
                raise ValueError("give either omega or omega_2pi, not both")
            p["omega"] = 2 * math.pi * p.pop("omega_2pi")
        p.setdefault("omega", 0.0)
        p.setdefault("kappa", 0.0)
        return build_ibm(IbmParams(**p))


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 values")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"axis {self.name!r} values must be strictly increasing")
        object.__setattr__(self, "values", values)

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, count: int) -> "Axis":
        if not hi > lo:
            raise ValueError(f"axis {name!r} range must have positive length, got [{lo}, {hi}]")
        if count < 2:
            raise ValueError(f"axis {name!r} count must be >= 2, got {count}")
        return cls(name, tuple(np.linspace(lo, hi, int(count))))

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name:lo:hi:count``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"axis {text!r} is not of the form name:lo:hi:count")
        name, lo, hi, count = parts
        return cls.linspace(name, float(lo), float(hi), int(count))

    @property
    def lo(self) -> float:
        return self.values[0]

    @property
    def hi(self) -> float:
        return self.values[-1]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SweepGrid:
    """Per-cell reset outcomes, stored row-major with ``axis1`` as the outer index."""

    axes: tuple[Axis, ...]
    cells: tuple[ResetOutcome, ...]
    approach: str
    threshold: float
    horizon: float

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep has one or two axes")
        if len(self.cells) != math.prod(len(a) for a in self.axes):
            raise ValueError("cell count does not match the axes")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def points(self):
        """Parameter dicts in cell order."""
        for idx in np.ndindex(*self.shape):
            yield {ax.name: ax.values[i] for ax, i in zip(self.axes, idx)}

    def t_stop_array(self) -> np.ndarray:
        """Reset times shaped like the grid; non-finite cells are NaN."""
        return np.array([c.t_stop if c.finite else np.nan for c in self.cells]).reshape(self.shape)

    def status_array(self) -> np.ndarray:
        return np.array([c.status for c in self.cells]).reshape(self.shape)


@dataclass(frozen=True)
class Optimum:
    params: dict
    t_stop: float


def _evaluate(job):
    family, params, approach, threshold, horizon, opts = job
    try:
        model = family.build(**params)
    except ValueError as exc:
        return ResetOutcome("error", approach, threshold, message=str(exc))
    return reset_time(model, approach, threshold, horizon, **opts)


def sweep(family: ModelFamily, axes: Sequence[Axis], approach: str = "steady",
          threshold: float = DEFAULT_THRESHOLD, horizon: float = DEFAULT_HORIZON, *,
          sample_dt: float = DEFAULT_SAMPLE_DT, atol: float = DEFAULT_ATOL,
          rtol: float = DEFAULT_RTOL, workers: int = 1) -> SweepGrid:
    """Evaluate the reset outcome of every grid cell.

    Cells are independent; with ``workers > 1`` they run in a process pool and
    are gathered by index, so the grid does not depend on the worker count.
    """
    axes = tuple(axes)
    family.check_names(ax.name for ax in axes)
    shape = tuple(len(a) for a in axes)
    opts = dict(sample_dt=sample_dt, atol=atol, rtol=rtol)
    jobs = [(family, {ax.name: ax.values[i] for ax, i in zip(axes, idx)}, approach, threshold,
             horizon, opts) for idx in np.ndindex(*shape)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_evaluate(j) for j in jobs]
    return SweepGrid(axes, tuple(cells), approach, threshold, horizon)


def find_optimum(grid: SweepGrid) -> Optimum:
    """Finite cell with the smallest reset time; ties go to the smallest axis values."""
    best = None
    for params, cell in zip(grid.points(), grid.cells):
        if cell.finite and (best is None or cell.t_stop < best.t_stop):
            best = Optimum(params, cell.t_stop)
    if best is None:
        raise ValueError("no cell of the grid reset within the horizon")
    return best


def _window(axis: Axis, centre: float, shrink: float, count: int, bounds: tuple[float, float]) -> Axis:
    half = shrink * (axis.hi - axis.lo)
    lo, hi = max(bounds[0], centre - half), min(bounds[1], centre + half)
    if hi - lo <= 1e-12 * max(1.0, abs(centre)):
        raise ValueError(f"refinement window on {axis.name!r} collapsed below numeric resolution")
    values = np.union1d(np.linspace(lo, hi, count), [centre])
    return Axis(axis.name, tuple(values))


def refine_optimum(family: ModelFamily, grid: SweepGrid, coarse: Optimum | None = None, *,
                   shrink: float = 0.1, counts: Sequence[int] | None = None, passes: int = 1,
                   **sweep_kwargs) -> tuple[Optimum, SweepGrid]:
    """Re-sweep a window of +-shrink*range around the optimum, ``passes`` times.

    Windows are clipped to the original axis bounds and always contain the
    previous optimum, so the result never exceeds the coarse reset time.
    """
    if coarse is None:
        coarse = find_optimum(grid)
    if not 0 < shrink <= 1:
        raise ValueError(f"shrink must lie in (0, 1], got {shrink}")
    counts = tuple(counts) if counts is not None else grid.shape
    bounds = [(ax.lo, ax.hi) for ax in grid.axes]
    best, current = coarse, grid
    for _ in range(passes):
        axes = [_window(ax, best.params[ax.name], shrink, n, b)
                for ax, n, b in zip(current.axes, counts, bounds)]
        current = sweep(family, axes, grid.approach, grid.threshold, grid.horizon, **sweep_kwargs)
        found = find_optimum(current)
        if found.t_stop <= best.t_stop:
            best = found
    return best, current
