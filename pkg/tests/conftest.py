import numpy as np
import pytest
from scipy.linalg import expm


def two_qubit_closed_form(gamma, times, g=1.0):
    """p_g of the main qubit from the single-excitation amplitudes.

    Starting in |e,g> the jump only leaves the excitation subspace, so the
    amplitudes (c_M, c_A) follow the non-Hermitian 2x2 generator exactly.
    """
    heff = np.array([[0.0, g], [g, -0.5j * gamma]])
    out = np.empty(len(times))
    for k, t in enumerate(times):
        c = expm(-1j * heff * t) @ np.array([1.0, 0.0])
        out[k] = 1.0 - abs(c[0]) ** 2
    return out


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = []


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def check(ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
