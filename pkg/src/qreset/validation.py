"""Input validation shared by the estimators, the config loader and the CLI."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array, check_scalar

from .metrics import APPROACHES
from .sweep import MODEL_PARAMS


class ConfigError(ValueError):
    """Invalid configuration; ``field`` and ``line`` locate the offending entry when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.message = message
        self.field = field
        self.line = line


def check_threshold(threshold, name="threshold") -> float:
    check_scalar(threshold, name, numbers.Real)
    if not 0 < threshold < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {threshold}")
    return float(threshold)


def check_horizon(horizon, name="horizon") -> float:
    check_scalar(horizon, name, numbers.Real, min_val=0, include_boundaries="neither")
    return float(horizon)


def check_approach(approach) -> str:
    if approach not in APPROACHES:
        raise ValueError(f"approach must be one of {APPROACHES}, got {approach!r}")
    return approach


def check_model(model) -> str:
    if model not in MODEL_PARAMS:
        raise ValueError(f"model must be one of {sorted(MODEL_PARAMS)}, got {model!r}")
    return model


def check_param_names(model, names) -> list[str]:
    names = list(names)
    unknown = [n for n in names if n not in MODEL_PARAMS[model]]
    if unknown:
        raise ValueError(f"unknown parameter(s) {unknown} for model {model!r}")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate parameter names in {names}")
    return names


def check_param_matrix(X, n_params: int) -> np.ndarray:
    """2-D float array of parameter rows with exactly ``n_params`` columns."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)
    if X.shape[1] != n_params:
        raise ValueError(f"X has {X.shape[1]} columns, expected {n_params}")
    return X
