"""Lindblad simulation, detection and optimization of dissipative qubit reset protocols."""
from .engine import (CollapseChannel, IntegrationError, Trajectory, exact_propagate, exact_samples,
                     integrate, lindblad_rhs, liouvillian, propagate)
from .estimator import ResetOptimizer, ResetTimeEstimator
from .hilbert import (DensityMatrix, Operator, annihilation, embed, identity, partial_trace, tensor,
                      transition)
from .metrics import PULSED, STEADY, ResetOutcome, detect, detect_pulsed, detect_steady, reset_time
from .models import (IbmParams, ModelSpec, build_ibm, build_two_qubit, build_two_qubit_cavity,
                     ground_population)
from .purcell import PurcellQuery, effective_decay, purcell_time, required_detuning
from .sweep import Axis, ModelFamily, Optimum, SweepGrid, find_optimum, refine_optimum, sweep

__all__ = [
    "Operator", "DensityMatrix", "identity", "annihilation", "transition", "tensor", "embed",
    "partial_trace", "CollapseChannel", "Trajectory", "IntegrationError", "lindblad_rhs",
    "liouvillian", "integrate", "propagate", "exact_propagate", "exact_samples", "ModelSpec",
    "IbmParams", "build_two_qubit", "build_two_qubit_cavity", "build_ibm", "ground_population",
    "ResetOutcome", "PULSED", "STEADY", "detect", "detect_pulsed", "detect_steady", "reset_time",
    "Axis", "ModelFamily", "SweepGrid", "Optimum", "sweep", "find_optimum", "refine_optimum",
    "PurcellQuery", "purcell_time", "effective_decay", "required_detuning",
    "ResetTimeEstimator", "ResetOptimizer",
]
