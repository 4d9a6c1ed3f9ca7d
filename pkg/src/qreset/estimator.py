"""Estimator-style wrappers: reset time as a function of parameter rows, and grid optimization.

``ResetTimeEstimator`` has nothing to learn; ``fit`` only validates and records
the column names, and ``predict`` integrates each row. ``ResetOptimizer.fit``
runs the grid sweep and refinement and exposes the result as fitted attributes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .engine import DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_SAMPLE_DT
from .metrics import DEFAULT_HORIZON, DEFAULT_THRESHOLD, STEADY, reset_time
from .sweep import Axis, ModelFamily, find_optimum, refine_optimum, sweep
from .validation import (check_approach, check_horizon, check_model, check_param_matrix,
                         check_param_names, check_threshold)


class ResetTimeEstimator(BaseEstimator):
    """Predict the reset time g*t_stop for rows of model parameters.

    Rows that never reset within the horizon, or whose integration fails,
    predict NaN; :meth:`predict_outcomes` returns the full outcomes.
    """

    def __init__(self, model="two_qubit", param_names=("gamma",), fixed=None, approach=STEADY,
                 threshold=DEFAULT_THRESHOLD, horizon=DEFAULT_HORIZON,
                 sample_dt=DEFAULT_SAMPLE_DT, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
        self.model = model
        self.param_names = param_names
        self.fixed = fixed
        self.approach = approach
        self.threshold = threshold
        self.horizon = horizon
        self.sample_dt = sample_dt
        self.atol = atol
        self.rtol = rtol

    def _validate_params(self):
        check_model(self.model)
        names = check_param_names(self.model, self.param_names)
        check_approach(self.approach)
        check_threshold(self.threshold)
        check_horizon(self.horizon)
        return names

    def fit(self, X=None, y=None):
        self.param_names_ = self._validate_params()
        self.family_ = ModelFamily(self.model, dict(self.fixed or {}))
        self.family_.check_names(self.param_names_)
        if X is not None:
            check_param_matrix(X, len(self.param_names_))
        self.n_features_in_ = len(self.param_names_)
        return self

    def predict_outcomes(self, X):
        check_is_fitted(self, "family_")
        X = check_param_matrix(X, self.n_features_in_)
        out = []
        for row in X:
            model = self.family_.build(**dict(zip(self.param_names_, row)))
            out.append(reset_time(model, self.approach, self.threshold, self.horizon,
                                  sample_dt=self.sample_dt, atol=self.atol, rtol=self.rtol))
        return out

    def predict(self, X) -> np.ndarray:
        return np.array([o.t_stop if o.finite else np.nan for o in self.predict_outcomes(X)])


class ResetOptimizer(BaseEstimator):
    """Grid-search the reset time over one or two axes, then refine around the optimum.

    ``axes`` holds ``(name, lo, hi, count)`` tuples or ``"name:lo:hi:count"``
    strings. After ``fit``: ``grid_`` (coarse grid), ``coarse_``,
    ``best_params_``, ``best_t_stop_`` and ``refined_grid_`` (None without
    refinement).
    """

    def __init__(self, model="two_qubit", axes=(("gamma", 0.1, 20.0, 100),), fixed=None,
                 approach=STEADY, threshold=DEFAULT_THRESHOLD, horizon=DEFAULT_HORIZON,
                 refine_passes=2, shrink=0.1, sample_dt=DEFAULT_SAMPLE_DT, atol=DEFAULT_ATOL,
                 rtol=DEFAULT_RTOL, workers=1):
        self.model = model
        self.axes = axes
        self.fixed = fixed
        self.approach = approach
        self.threshold = threshold
        self.horizon = horizon
        self.refine_passes = refine_passes
        self.shrink = shrink
        self.sample_dt = sample_dt
        self.atol = atol
        self.rtol = rtol
        self.workers = workers

    def _axes(self) -> list[Axis]:
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("axes must hold one or two entries")
        axes = [Axis.parse(a) if isinstance(a, str) else Axis.linspace(*a) for a in self.axes]
        check_param_names(self.model, [a.name for a in axes])
        return axes

    def fit(self, X=None, y=None):
        check_model(self.model)
        check_approach(self.approach)
        check_threshold(self.threshold)
        check_horizon(self.horizon)
        axes = self._axes()
        family = ModelFamily(self.model, dict(self.fixed or {}))
        opts = dict(sample_dt=self.sample_dt, atol=self.atol, rtol=self.rtol, workers=self.workers)
        self.grid_ = sweep(family, axes, self.approach, self.threshold, self.horizon, **opts)
        self.coarse_ = find_optimum(self.grid_)
        best, self.refined_grid_ = self.coarse_, None
        if self.refine_passes > 0:
            best, self.refined_grid_ = refine_optimum(family, self.grid_, self.coarse_,
                                                      shrink=self.shrink, passes=self.refine_passes,
                                                      **opts)
        self.best_params_ = dict(best.params)
        self.best_t_stop_ = best.t_stop
        return self
