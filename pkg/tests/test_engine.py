import math

import numpy as np
import pytest

from qreset.engine import (CollapseChannel, IntegrationError, Trajectory, exact_propagate,
                           exact_samples, integrate, lindblad_rhs, liouvillian, propagate)
from qreset.hilbert import DensityMatrix, Operator, annihilation, embed, transition
from qreset.models import ModelSpec, build_ibm, build_two_qubit, build_two_qubit_cavity, IbmParams

from conftest import random_density, two_qubit_closed_form


def random_system(rng, d, n_channels=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = Operator(a + a.conj().T)
    chans = [CollapseChannel(Operator(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))),
                             rng.uniform(0, 2)) for _ in range(n_channels)]
    return H, chans


def test_rhs_traceless_and_hermitian(rng):
    for d in (2, 3, 5):
        H, chans = random_system(rng, d)
        rho = DensityMatrix(random_density(rng, d))
        drho = lindblad_rhs(H, chans, rho)
        assert abs(np.trace(drho)) < 1e-12
        np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)


def test_liouvillian_matches_rhs(rng):
    H, chans = random_system(rng, 4)
    rho = DensityMatrix(random_density(rng, 4))
    L = liouvillian(H, chans)
    got = (L @ rho.data.reshape(-1, order="F")).reshape(4, 4, order="F")
    np.testing.assert_allclose(got, lindblad_rhs(H, chans, rho), atol=1e-12)


def test_pure_decay_is_exponential():
    sm = transition(2, 0, 1)
    rho0 = DensityMatrix.from_ket([0, 1])
    model = ModelSpec(hamiltonian=Operator(np.zeros((2, 2))), channels=[CollapseChannel(sm, 0.7)],
                      initial=rho0, dims=(2,), main_index=0,
                      ground_projector=transition(2, 0, 0))
    # default rtol leaves ~2e-10 global error; resolve the 1e-10 check with a tighter run
    traj = integrate(model, 10.0, sample_dt=0.1, atol=1e-13, rtol=1e-11)
    np.testing.assert_allclose(1 - traj.pg, np.exp(-0.7 * traj.times), rtol=0, atol=1e-10)
    assert exact_propagate(model, 0.0) is model.initial


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        CollapseChannel(annihilation(1), -0.1)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        lindblad_rhs(annihilation(1), [CollapseChannel(annihilation(2), 1.0)],
                     DensityMatrix.from_ket([1, 0]))


@pytest.mark.parametrize("gamma", [0.5, 2.13, 4.0, 10.0])
def test_two_qubit_closed_form(gamma):
    traj = integrate(build_two_qubit(gamma), 10.0)
    ref = two_qubit_closed_form(gamma, traj.times)
    assert np.max(np.abs(traj.pg - ref)) < 1e-8


def test_undamped_rabi_period():
    traj = integrate(build_two_qubit(0.0), 2 * math.pi, sample_dt=math.pi / 4)
    # long free-running steps: global error of order rtol
    np.testing.assert_allclose(traj.pg, np.sin(traj.times) ** 2, atol=1e-7)


@pytest.mark.parametrize("model", [
    build_two_qubit(1.3),
    build_two_qubit_cavity(1.4, 3.8),
    build_ibm(IbmParams(omega=2 * math.pi * 0.1, kappa=5.0, n_transmon=3, n_cavity=2)),
], ids=["two_qubit", "cavity", "ibm"])
def test_matches_matrix_exponential(model):
    traj = integrate(model, 10.0, sample_dt=0.05)
    ref = exact_samples(model, traj.times)
    assert np.max(np.abs(traj.pg - ref)) < 1e-6


def test_state_invariants_with_stored_states(rng):
    for _ in range(5):
        model = build_two_qubit_cavity(rng.uniform(0, 4), rng.uniform(0, 10), n_cavity=2)
        traj = integrate(model, 5.0, sample_dt=0.25, store_states=True)
        for rho in traj.states:
            r = rho.data
            assert abs(np.trace(r) - 1) < 1e-8
            np.testing.assert_allclose(r, r.conj().T, atol=1e-10)
            assert np.linalg.eigvalsh(r).min() > -1e-8
        assert np.all((traj.pg > -1e-9) & (traj.pg < 1 + 1e-9))


def test_state_at_reconstructs_stored_state():
    model = build_two_qubit(2.0)
    full = integrate(model, 30.0, store_states=True)
    sparse = integrate(model, 30.0)
    assert len(sparse.checkpoints) < len(full.times)
    for i in (0, 7, 1234, len(full.times) - 1):
        np.testing.assert_allclose(sparse.state_at(i), full.states[i].data.reshape(-1), atol=1e-9)


def test_scale_invariance():
    # rates and time in units of g: rescaling g leaves p_g(g t) unchanged
    base = integrate(build_two_qubit(1.7), 8.0, sample_dt=0.1)
    s = 3.5
    scaled = integrate(build_two_qubit(1.7 * s, g=s), 8.0 / s, sample_dt=0.1 / s)
    assert np.max(np.abs(base.pg - scaled.pg)) < 1e-8


def test_piecewise_schedule_matches_exponential():
    m = build_two_qubit(1.0)
    H = m.hamiltonian
    sched = ModelSpec(hamiltonian=[(0.7, H * 0.0), (1.3, H), (1.0, H * 2.0)], channels=m.channels,
                      initial=m.initial, dims=m.dims, main_index=0,
                      ground_projector=m.ground_projector)
    traj = integrate(sched, 5.0, sample_dt=0.25)
    ref = [exact_propagate(sched, t).expect(sched.ground_projector) for t in traj.times]
    assert np.max(np.abs(traj.pg - ref)) < 1e-8
    # no dynamics during the idle first segment
    assert traj.pg[1] == pytest.approx(0.0, abs=1e-14)


def test_propagate_composes():
    m = build_two_qubit_cavity(1.0, 2.0)
    y0 = m.initial.data.reshape(-1)
    y_direct = propagate(m, y0, 0.0, 3.0)
    y_split = propagate(m, propagate(m, y0, 0.0, 1.1), 1.1, 3.0)
    np.testing.assert_allclose(y_direct, y_split, atol=1e-9)


def test_stop_level_halts_early():
    traj = integrate(build_two_qubit(0.5), 400.0, stop_level=0.98)
    assert traj.stopped and not traj.complete
    assert traj.pg[-1] >= 0.98 and np.all(traj.pg[:-1] < 0.98)


def test_settle_requires_excitation_bound():
    m = build_ibm(IbmParams(omega=1.0, kappa=1.0, n_transmon=3, n_cavity=1))
    with pytest.raises(ValueError):
        integrate(m, 1.0, settle_threshold=0.98)


def test_settle_certificate():
    traj = integrate(build_two_qubit(2.0), 400.0, settle_threshold=0.98)
    assert traj.settled and traj.times[-1] < 20
    # the certificate is honest: the rest of the curve never dips below the threshold
    full = integrate(build_two_qubit(2.0), 60.0)
    assert full.pg[len(traj.times) - 1:].min() >= 0.98


def test_underflow_raises_with_time():
    with pytest.raises(IntegrationError) as err:
        integrate(build_two_qubit(1.0), 1.0, atol=1e-300, rtol=1e-300)
    assert err.value.time >= 0.0


def test_oracle_dimension_cap():
    m = build_ibm(IbmParams(omega=1.0, kappa=1.0, n_transmon=5, n_cavity=5))
    with pytest.raises(ValueError, match="oracle cap"):
        exact_propagate(m, 1.0)


def test_bad_arguments():
    m = build_two_qubit(1.0)
    with pytest.raises(ValueError):
        integrate(m, 0.0)
    with pytest.raises(ValueError):
        integrate(m, 1.0, sample_dt=-1)
    with pytest.raises(ValueError):
        Trajectory(times=[0.0, 0.0], pg=[0.0, 0.0], t_end=1.0)
