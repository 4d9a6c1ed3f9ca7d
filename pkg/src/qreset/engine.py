"""Lindblad right-hand side, adaptive integration and the exact propagation oracle.

All quantities are dimensionless: rates and times are measured in units of the
primary coupling of the model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.linalg import expm

from . import _dopri
from .hilbert import DensityMatrix, Operator

if TYPE_CHECKING:
    from .models import ModelSpec

DEFAULT_ATOL = 1e-10
DEFAULT_RTOL = 1e-8
DEFAULT_SAMPLE_DT = 0.01
ORACLE_MAX_DIM = 24
# below this Hilbert dimension the dense superoperator mat-vec is the faster kernel path
SUPEROP_MAX_DIM = 6
MAX_CHECKPOINTS = 1000


class IntegrationError(RuntimeError):
    """Adaptive step size underflow; ``time`` is where the integrator gave up."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class CollapseChannel:
    operator: Operator
    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"collapse rate must be non-negative, got {self.rate}")
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(eq=False)
class Trajectory:
    """Sampled ground-state population of the main subsystem.

    ``stopped`` marks a run halted at the first sample reaching ``stop_level``;
    ``settled`` marks a run halted once the excitation bound certified that the
    population can no longer drop below the threshold it was asked about.
    """

    times: np.ndarray
    pg: np.ndarray
    t_end: float
    states: list[DensityMatrix] | None = None
    model: "ModelSpec | None" = None
    checkpoints: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    stopped: bool = False
    settled: bool = False
    settle_threshold: float | None = None
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.pg = np.asarray(self.pg, dtype=float)
        if self.times.shape != self.pg.shape or self.times.ndim != 1:
            raise ValueError("times and pg must be 1-D arrays of equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def complete(self) -> bool:
        return not (self.stopped or self.settled)

    def state_at(self, index: int) -> np.ndarray:
        """Row-major flattened state at sample ``index``, re-integrated from the nearest checkpoint."""
        if self.model is None:
            raise ValueError("trajectory carries no model; states cannot be reconstructed")
        if index in self.checkpoints:
            return self.checkpoints[index]
        base = max(k for k in self.checkpoints if k <= index)
        return propagate(self.model, self.checkpoints[base], self.times[base], self.times[index],
                         atol=self.atol, rtol=self.rtol)


def _expect(op: np.ndarray, y: np.ndarray) -> float:
    d = op.shape[0]
    return float(np.real(np.trace(op @ y.reshape(d, d))))


def _check_dims(H: Operator, channels: Sequence[CollapseChannel], dims) -> None:
    if H.dims != tuple(dims):
        raise ValueError(f"Hamiltonian dims {H.dims} do not match {tuple(dims)}")
    for c in channels:
        if c.operator.dims != H.dims:
            raise ValueError(f"collapse operator dims {c.operator.dims} do not match {H.dims}")


def lindblad_rhs(H: Operator, channels: Sequence[CollapseChannel], rho: DensityMatrix) -> np.ndarray:
    """Time derivative of ``rho`` under the Lindblad generator."""
    _check_dims(H, channels, rho.dims)
    r = rho.data
    out = -1j * (H.data @ r - r @ H.data)
    for c in channels:
        L = c.operator.data
        LdL = L.conj().T @ L
        out += 0.5 * c.rate * (2 * L @ r @ L.conj().T - LdL @ r - r @ LdL)
    return out


def liouvillian(H: Operator, channels: Sequence[CollapseChannel]) -> np.ndarray:
    """d^2 x d^2 generator acting on column-stacked density matrices."""
    _check_dims(H, channels, H.dims)
    d = H.dim
    eye = np.eye(d)
    h = H.data
    sup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in channels:
        L = c.operator.data
        LdL = L.conj().T @ L
        sup += c.rate * (np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye))
    return sup


def _kernel_ops(H: Operator, channels: Sequence[CollapseChannel]):
    d = H.dim
    heff = H.data.copy()
    jumps = np.zeros((len(channels), d, d), dtype=np.complex128)
    for i, c in enumerate(channels):
        L = c.operator.data
        heff = heff - 0.5j * c.rate * (L.conj().T @ L)
        jumps[i] = math.sqrt(c.rate) * L
    if d <= SUPEROP_MAX_DIM:
        eye = np.eye(d)
        # row-major vec(A X B) = (A kron B^T) vec(X)
        sup = -1j * np.kron(heff, eye) + 1j * np.kron(eye, heff.conj())
        for j in jumps:
            sup += np.kron(j, j.conj())
    else:
        sup = np.zeros((0, 0), dtype=np.complex128)
    return np.ascontiguousarray(heff), jumps, np.ascontiguousarray(sup)


def _segment_ops(model: "ModelSpec"):
    cache = getattr(model, "_kernel_cache", None)
    if cache is None:
        cache = [(t0, t1, _kernel_ops(H, model.channels)) for t0, t1, H in model.segments()]
        object.__setattr__(model, "_kernel_cache", cache)
    return cache


_EMPTY = np.zeros((0, 0), dtype=np.complex128)


def propagate(model: "ModelSpec", y: np.ndarray, t0: float, t1: float, *,
              atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Integrate a flattened state from ``t0`` to ``t1`` across schedule segments."""
    d = model.initial.dim
    proj = np.array(model.ground_projector.data)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    t = float(t0)
    for s0, s1, (heff, jumps, sup) in _segment_ops(model):
        if s1 <= t or t >= t1:
            continue
        hi = min(s1, t1)
        h = min(_dopri.initial_step(y, d, heff, jumps, sup, atol, rtol), hi - t)
        _, _, _, status, t_fail, y, _ = _dopri.integrate_targets(
            y, t, np.array([hi]), d, heff, jumps, sup, proj, _EMPTY, h,
            atol, rtol, 1, np.nan, 0.0)
        if status == _dopri.UNDERFLOW:
            raise IntegrationError(f"step size underflow at t={t_fail:.6g}", t_fail)
        t = hi
    return y


def integrate(model: "ModelSpec", t_end: float, sample_dt: float = DEFAULT_SAMPLE_DT, *,
              atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL,
              store_states: bool = False, stop_level: float | None = None,
              settle_threshold: float | None = None) -> Trajectory:
    """Integrate the model's master equation on a uniform sample grid.

    Each sample time is hit exactly by clipping the adaptive step. With
    ``stop_level`` the run halts at the first sample whose population reaches
    it. With ``settle_threshold`` (only for models that declare an excitation
    bound) the run halts once the bound guarantees the population stays at or
    above that threshold for all later times.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not sample_dt > 0:
        raise ValueError(f"sample_dt must be positive, got {sample_dt}")
    d = model.initial.dim
    n = max(1, math.ceil(t_end / sample_dt - 1e-9))
    times = np.linspace(0.0, t_end, n + 1)
    proj = np.array(model.ground_projector.data)
    settle = _EMPTY
    settle_level = 0.0
    if settle_threshold is not None:
        if model.excitation is None:
            raise ValueError("model declares no excitation bound; settling is unavailable")
        settle = np.array(model.excitation.data)
        settle_level = 1.0 - settle_threshold
    stride = 1 if store_states else max(1, math.ceil((n + 1) / MAX_CHECKPOINTS))
    stop = np.nan if stop_level is None else float(stop_level)

    y = np.array(model.initial.data.reshape(-1))
    pg = np.empty(n + 1)
    pg[0] = _expect(proj, y)
    checkpoints = {0: y.copy()}
    n_done = 1
    status = _dopri.OK
    if stop_level is not None and pg[0] >= stop:
        status = _dopri.STOPPED
    h = None
    t = 0.0
    for s0, s1, (heff, jumps, sup) in _segment_ops(model):
        if status != _dopri.OK or t >= t_end:
            break
        if s1 <= t:
            continue
        hi = min(s1, t_end)
        idx = np.nonzero((times > t) & (times <= hi))[0]
        targets = times[idx]
        extra = len(targets) == 0 or targets[-1] < hi
        if extra:
            targets = np.append(targets, hi)
        if h is None:
            h = min(_dopri.initial_step(y, d, heff, jumps, sup, atol, rtol), sample_dt)
        seg_pg, ck, done, status, t_fail, y, h = _dopri.integrate_targets(
            y, t, targets, d, heff, jumps, sup, proj, settle, h, atol, rtol,
            stride, stop, settle_level)
        if status == _dopri.UNDERFLOW:
            raise IntegrationError(f"step size underflow at t={t_fail:.6g}", t_fail)
        real = min(done, len(idx))
        pg[idx[:real]] = seg_pg[:real]
        for k in range(0, real, stride):
            checkpoints[int(idx[k])] = ck[k // stride].copy()
        n_done = int(idx[real - 1]) + 1 if real else n_done
        if extra and done == len(targets):
            # a halt on the segment-end target is not at a sample; resume in the next segment
            status = _dopri.OK
        t = hi
    if status in (_dopri.STOPPED, _dopri.SETTLED):
        # the state at the halting sample is needed for refinement
        last = n_done - 1
        if last not in checkpoints:
            checkpoints[last] = y.copy()
    states = None
    if store_states:
        states = [DensityMatrix(checkpoints[i].reshape(d, d), model.dims, validate=False)
                  for i in range(n_done)]
    return Trajectory(
        times=times[:n_done], pg=pg[:n_done], t_end=float(t_end), states=states, model=model,
        checkpoints=checkpoints, stopped=status == _dopri.STOPPED,
        settled=status == _dopri.SETTLED,
        settle_threshold=settle_threshold if status == _dopri.SETTLED else None,
        atol=atol, rtol=rtol)


def _check_oracle_dim(model: "ModelSpec", max_dim: int) -> None:
    if model.initial.dim > max_dim:
        raise ValueError(
            f"dimension {model.initial.dim} exceeds the oracle cap {max_dim} "
            f"(superoperator {model.initial.dim ** 2}x{model.initial.dim ** 2})")


def exact_propagate(model: "ModelSpec", t: float, *, max_dim: int = ORACLE_MAX_DIM) -> DensityMatrix:
    """rho(t) from the matrix exponential of the Liouvillian, segment by segment."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    _check_oracle_dim(model, max_dim)
    d = model.initial.dim
    if t == 0:
        return model.initial
    v = model.initial.data.reshape(-1, order="F")
    for s0, s1, H in model.segments():
        if s0 >= t:
            break
        dt = min(s1, t) - s0
        v = expm(liouvillian(H, model.channels) * dt) @ v
    return DensityMatrix(v.reshape(d, d, order="F"), model.dims, validate=False)


def exact_samples(model: "ModelSpec", times: Sequence[float], *,
                  max_dim: int = ORACLE_MAX_DIM) -> np.ndarray:
    """Oracle ground-state populations at ``times`` (uniform grids reuse one exponential)."""
    _check_oracle_dim(model, max_dim)
    times = np.asarray(times, dtype=float)
    segs = model.segments()
    proj = model.ground_projector.data
    d = model.initial.dim
    steps = np.diff(times)
    uniform = (len(segs) == 1 and len(times) > 1 and times[0] == 0.0
               and np.allclose(steps, steps[0], rtol=0, atol=1e-12))
    if not uniform:
        return np.array([exact_propagate(model, t, max_dim=max_dim).expect(model.ground_projector)
                         for t in times])
    step = expm(liouvillian(segs[0][2], model.channels) * steps[0])
    v = model.initial.data.reshape(-1, order="F")
    out = np.empty(len(times))
    for k in range(len(times)):
        out[k] = np.real(np.trace(proj @ v.reshape(d, d, order="F")))
        v = step @ v
    return out
