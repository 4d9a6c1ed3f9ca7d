"""Builders for the three reset configurations.

* two-qubit: main qubit exchanging excitation with a damped auxiliary qubit;
* two-qubit-cavity: the auxiliary qubit is itself coupled to a damped cavity;
* ibm: driven multilevel transmon whose f0-g1 sideband empties into a damped cavity.

Rates are expressed in units of the primary coupling, which defaults to 1. The
main qubit carries no dissipation of its own.
"""
from __future__ import annotations

import math
from functools import reduce
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .engine import CollapseChannel
from .hilbert import DensityMatrix, Operator, annihilation, embed, transition

G, E, F = 0, 1, 2

Schedule = Sequence[tuple[float, Operator]]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Everything the engine needs to evolve one reset configuration.

    ``hamiltonian`` is either a single operator or a piecewise-constant schedule
    of ``(duration, operator)`` segments; the last segment persists forever.
    ``excitation``, when set, is an observable whose expectation bounds the
    main qubit's excited population from above and never increases in time.
    """

    hamiltonian: Union[Operator, tuple]
    channels: tuple[CollapseChannel, ...]
    initial: DensityMatrix
    dims: tuple[int, ...]
    main_index: int
    ground_projector: Operator
    excitation: Operator | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "channels", tuple(self.channels))
        if not isinstance(self.hamiltonian, Operator):
            object.__setattr__(self, "hamiltonian", tuple((float(t), H) for t, H in self.hamiltonian))
        for _, _, H in self.segments():
            if H.dims != self.dims:
                raise ValueError(f"Hamiltonian dims {H.dims} do not match model dims {self.dims}")
            if not H.is_hermitian(1e-12):
                raise ValueError("Hamiltonian is not Hermitian")
        for c in self.channels:
            if c.operator.dims != self.dims:
                raise ValueError(f"collapse operator dims {c.operator.dims} do not match {self.dims}")
        if self.initial.dims != self.dims:
            raise ValueError(f"initial state dims {self.initial.dims} do not match {self.dims}")
        P = self.ground_projector.data
        if not (self.ground_projector.is_hermitian(1e-12) and np.allclose(P @ P, P, atol=1e-12)):
            raise ValueError("ground projector must be Hermitian and idempotent")
        if not 0 <= self.main_index < len(self.dims):
            raise ValueError(f"main_index {self.main_index} out of range")

    def segments(self) -> list[tuple[float, float, Operator]]:
        if isinstance(self.hamiltonian, Operator):
            return [(0.0, math.inf, self.hamiltonian)]
        out, t = [], 0.0
        for k, (dur, H) in enumerate(self.hamiltonian):
            if not dur > 0:
                raise ValueError(f"schedule segment durations must be positive, got {dur}")
            end = math.inf if k == len(self.hamiltonian) - 1 else t + dur
            out.append((t, end, H))
            t = end
        return out

    @property
    def time_independent(self) -> bool:
        return isinstance(self.hamiltonian, Operator)


def _ground_projector(dims, main_index) -> Operator:
    return embed(transition(dims[main_index], G, G), main_index, dims)


def _basis_state(dims, levels) -> DensityMatrix:
    ket = reduce(np.kron, [np.eye(d)[lv] for d, lv in zip(dims, levels)])
    return DensityMatrix.from_ket(ket, dims)


def build_two_qubit(gamma: float, g: float = 1.0) -> ModelSpec:
    if not gamma >= 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    dims = [2, 2]
    sM_eg = embed(transition(2, E, G), 0, dims)
    sA_ge = embed(transition(2, G, E), 1, dims)
    coupling = g * (sM_eg @ sA_ge)
    H = coupling + coupling.H
    number = embed(transition(2, E, E), 0, dims) + embed(transition(2, E, E), 1, dims)
    return ModelSpec(
        hamiltonian=H,
        channels=[CollapseChannel(sA_ge, gamma)],
        initial=_basis_state(dims, [E, G]),
        dims=dims,
        main_index=0,
        ground_projector=_ground_projector(dims, 0),
        excitation=number,
        name="two_qubit",
        params={"gamma": float(gamma), "g": float(g)},
    )


def build_two_qubit_cavity(lam: float, kappa: float, n_cavity: int = 1, g: float = 1.0) -> ModelSpec:
    """Main qubit -- auxiliary qubit -- damped cavity chain.

    One photon suffices for a single initial excitation, hence the default
    truncation ``n_cavity=1``.
    """
    if not lam >= 0 or not kappa >= 0:
        raise ValueError(f"lambda and kappa must be non-negative, got {lam}, {kappa}")
    if int(n_cavity) != n_cavity or n_cavity < 1:
        raise ValueError(f"n_cavity must be an integer >= 1, got {n_cavity}")
    n_cavity = int(n_cavity)
    dims = [2, 2, n_cavity + 1]
    sM_eg = embed(transition(2, E, G), 0, dims)
    sA_ge = embed(transition(2, G, E), 1, dims)
    sA_eg = sA_ge.H
    a = embed(annihilation(n_cavity), 2, dims)
    coupling = g * (sM_eg @ sA_ge) + lam * (sA_eg @ a)
    H = coupling + coupling.H
    number = (embed(transition(2, E, E), 0, dims) + embed(transition(2, E, E), 1, dims)
              + a.H @ a)
    return ModelSpec(
        hamiltonian=H,
        channels=[CollapseChannel(a, kappa)],
        initial=_basis_state(dims, [E, G, 0]),
        dims=dims,
        main_index=0,
        ground_projector=_ground_projector(dims, 0),
        excitation=number,
        name="two_qubit_cavity",
        params={"lambda": float(lam), "kappa": float(kappa), "n_cavity": n_cavity, "g": float(g)},
    )


@dataclass(frozen=True)
class IbmParams:
    """Driven transmon + readout cavity in the rotating frame of the drive.

    All rates share the unit of ``gtilde``. ``alpha`` is the coefficient of the
    ``(alpha/2) b^dag b^dag b b`` Kerr term and ``alpha_sign`` flips it, so the
    anharmonicity convention is selectable. When ``delta_c`` is omitted it is
    placed on the bare f0-g1 resonance of the Hamiltonian being built,
    ``delta_c = 2 delta_q + alpha_sign * alpha``.
    """

    omega: float
    kappa: float
    alpha: float = -5.0
    delta_q: float = 8.0
    delta_c: float | None = None
    gtilde: float = 1.0
    n_transmon: int = 4
    n_cavity: int = 5
    alpha_sign: int = 1

    def __post_init__(self):
        if int(self.n_transmon) != self.n_transmon or self.n_transmon < 3:
            raise ValueError(f"n_transmon must be an integer >= 3, got {self.n_transmon}")
        if int(self.n_cavity) != self.n_cavity or self.n_cavity < 1:
            raise ValueError(f"n_cavity must be an integer >= 1, got {self.n_cavity}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        if self.alpha_sign not in (1, -1):
            raise ValueError(f"alpha_sign must be +1 or -1, got {self.alpha_sign}")
        for name in ("alpha", "delta_q", "gtilde"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def kerr(self) -> float:
        return self.alpha_sign * self.alpha

    @property
    def resolved_delta_c(self) -> float:
        if self.delta_c is None:
            return 2 * self.delta_q + self.kerr
        return float(self.delta_c)


def build_ibm(p: IbmParams) -> ModelSpec:
    nt, nc = int(p.n_transmon), int(p.n_cavity)
    dims = [nt, nc + 1]
    b = embed(annihilation(nt - 1), 0, dims)
    a = embed(annihilation(nc), 1, dims)
    bd, ad = b.H, a.H
    H = (p.resolved_delta_c * (ad @ a) + p.delta_q * (bd @ b) + 0.5 * p.kerr * (bd @ bd @ b @ b))
    coupling = p.gtilde * (a @ bd) + 0.5 * p.omega * bd
    H = H + coupling + coupling.H
    return ModelSpec(
        hamiltonian=H,
        channels=[CollapseChannel(a, p.kappa)],
        initial=_basis_state(dims, [F, 0]),
        dims=dims,
        main_index=0,
        ground_projector=_ground_projector(dims, 0),
        excitation=None,
        name="ibm",
        params={**p.__dict__, "delta_c": p.resolved_delta_c},
    )


def ground_population(rho: DensityMatrix, model: ModelSpec) -> float:
    """Population of the main subsystem's ground level, whatever the other subsystems do."""
    if rho.dims != model.dims:
        raise ValueError(f"state dims {rho.dims} do not match model dims {model.dims}")
    return rho.expect(model.ground_projector)
