"""Closed-form Purcell estimates for the idle (detuned) configuration.

Inputs share one angular-rate unit; conversion from ordinary frequencies
happens at the command-line boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


def _positive(**values) -> None:
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be strictly positive and finite, got {v}")


@dataclass(frozen=True)
class PurcellQuery:
    detuning: float
    coupling: float
    induced_rate: float

    def __post_init__(self):
        _positive(detuning=self.detuning, coupling=self.coupling, induced_rate=self.induced_rate)


def purcell_time(q: PurcellQuery) -> float:
    """Decay time ``(detuning / coupling)**2 / induced_rate``."""
    return (q.detuning / q.coupling) ** 2 / q.induced_rate


def effective_decay(lam: float, kappa: float) -> float:
    """Decay rate ``lam**2 / kappa`` of a qubit resonantly coupled to a lossy mode."""
    if not lam >= 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if kappa == 0:
        raise ValueError("kappa must be non-zero")
    _positive(kappa=kappa)
    return lam ** 2 / kappa


def required_detuning(t_target: float, coupling: float, induced_rate: float) -> float:
    """Detuning that yields Purcell time ``t_target``; inverse of :func:`purcell_time`."""
    _positive(t_target=t_target, coupling=coupling, induced_rate=induced_rate)
    return coupling * math.sqrt(t_target * induced_rate)
