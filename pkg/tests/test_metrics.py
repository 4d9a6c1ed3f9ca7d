import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qreset.engine import Trajectory, integrate
from qreset.metrics import (ERROR, OK, PULSED, STEADY, UNRESET, ResetOutcome, detect,
                            detect_pulsed, detect_steady, reset_time)
from qreset.models import build_two_qubit

from conftest import two_qubit_closed_form


def synthetic(pg, dt=1.0):
    pg = np.asarray(pg, dtype=float)
    return Trajectory(times=np.arange(len(pg)) * dt, pg=pg, t_end=(len(pg) - 1) * dt)


def test_pulsed_first_crossing_interpolated():
    traj = synthetic([0.0, 0.5, 0.99, 0.5, 0.99, 0.99])
    o = detect_pulsed(traj, 0.98)
    assert o.status == OK and o.approach == PULSED
    assert o.t_stop == pytest.approx(1 + (0.98 - 1e-9 - 0.5) / 0.49)


def test_steady_last_upward_crossing():
    traj = synthetic([0.0, 0.5, 0.99, 0.5, 0.99, 0.99])
    o = detect_steady(traj, 0.98)
    assert o.status == OK
    assert 3 < o.t_stop < 4


def test_steady_unreset_when_ending_below():
    assert detect_steady(synthetic([0.0, 0.99, 0.5]), 0.98).status == UNRESET
    assert detect_pulsed(synthetic([0.0, 0.5, 0.6]), 0.98).status == UNRESET


def test_grazing_sample_counts_as_reached():
    o = detect_pulsed(synthetic([0.0, 0.98 - 1e-12, 0.0]), 0.98)
    assert o.status == OK


def test_already_reset_at_start():
    assert detect_pulsed(synthetic([1.0, 1.0]), 0.98).t_stop == 0.0
    assert detect_steady(synthetic([1.0, 1.0]), 0.98).t_stop == 0.0


def test_steady_needs_full_horizon():
    with pytest.raises(ValueError):
        detect_steady(synthetic([0.0, 1.0]), 0.98, horizon=10)


@pytest.mark.parametrize("thr", [0.0, 1.0, 1.5])
def test_threshold_range(thr):
    with pytest.raises(ValueError):
        detect_pulsed(synthetic([0.0, 1.0]), thr)


def test_unknown_approach():
    with pytest.raises(ValueError):
        detect(synthetic([0.0, 1.0]), "sideways")


def test_refined_crossing_matches_closed_form_root():
    gamma = 2.13
    o = reset_time(build_two_qubit(gamma), STEADY, 0.98, 400.0)
    # sample the closed form finely around the detected time
    t = np.linspace(o.t_stop - 2e-4, o.t_stop + 2e-4, 9)
    p = two_qubit_closed_form(gamma, t)
    assert p[0] < 0.98 < p[-1]


def test_undamped_is_pulsed_but_never_steady():
    m = build_two_qubit(0.0)
    p = reset_time(m, PULSED, 0.98, 400.0)
    assert p.t_stop == pytest.approx(math.asin(math.sqrt(0.98)), abs=1e-4)
    assert reset_time(m, STEADY, 0.98, 400.0).status == UNRESET


def test_early_termination_agrees_with_full_run():
    for gamma in (0.3, 2.13, 7.0):
        m = build_two_qubit(gamma)
        full = integrate(m, 400.0)
        for approach in (PULSED, STEADY):
            fast = reset_time(m, approach, 0.98, 400.0)
            ref = detect(full, approach, 0.98, 400.0)
            assert fast.status == ref.status
            assert fast.t_stop == pytest.approx(ref.t_stop, abs=2e-4)


def test_integration_failure_becomes_error_outcome():
    o = reset_time(build_two_qubit(1.0), PULSED, 0.98, 5.0, atol=1e-300, rtol=1e-300)
    assert o.status == ERROR and "underflow" in o.message
    assert not o.finite and o.sort_key == math.inf


curves = st.lists(st.floats(0, 1), min_size=2, max_size=40)


@settings(max_examples=200, deadline=None)
@given(curves, st.floats(0.5, 0.99), st.floats(0.5, 0.99))
def test_detectors_monotone_in_threshold(pg, a, b):
    lo, hi = sorted((a, b))
    traj = synthetic(pg)
    for fn in (detect_pulsed, detect_steady):
        o_lo, o_hi = fn(traj, lo), fn(traj, hi)
        if o_hi.finite:
            assert o_lo.finite and o_lo.t_stop <= o_hi.t_stop + 1e-12


@settings(max_examples=200, deadline=None)
@given(curves, st.floats(0.5, 0.99))
def test_pulsed_never_after_steady(pg, thr):
    traj = synthetic(pg)
    p, s = detect_pulsed(traj, thr), detect_steady(traj, thr)
    if s.finite:
        assert p.finite and p.t_stop <= s.t_stop + 1e-12


def test_outcome_sort_key():
    assert ResetOutcome(OK, STEADY, 0.98, 2.0).sort_key == 2.0
    assert ResetOutcome(UNRESET, STEADY, 0.98).sort_key == math.inf
