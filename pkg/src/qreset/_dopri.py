"""Dormand-Prince 5(4) stepping kernel for the Lindblad equation.

The state is the row-major flattened density matrix. The right-hand side is
evaluated either as a dense superoperator mat-vec (small dimensions) or in
matrix form ``Y + Y^dag + sum_c J rho J^dag`` with ``Y = -i H_eff rho``; the
latter relies on stage states being Hermitian, which holds because every
stage is a real linear combination of Hermitian matrices.
"""
import numpy as np
from numba import njit

# Butcher tableau
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

OK, STOPPED, SETTLED, UNDERFLOW = 0, 1, 2, -1

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@njit(cache=True)
def _rhs(y, d, heff, jumps, sup, out):
    n = y.shape[0]
    if sup.shape[0] > 0:
        for i in range(n):
            acc = 0j
            for k in range(n):
                acc += sup[i, k] * y[k]
            out[i] = acc
        return
    rho = y.reshape((d, d))
    x = -1j * (heff @ rho)
    res = x + x.conj().T
    for c in range(jumps.shape[0]):
        j = np.ascontiguousarray(jumps[c])
        res += (j @ rho) @ j.conj().T
    out[:] = res.reshape(n)


@njit(cache=True)
def _expect(y, d, op):
    # Re tr(op @ rho) for row-major flattened rho
    s = 0.0
    for i in range(d):
        for k in range(d):
            s += (op[i, k] * y[k * d + i]).real
    return s


@njit(cache=True)
def _err_norm(err, y, ynew, atol, rtol):
    s = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        r = abs(err[i]) / sc
        s += r * r
    return np.sqrt(s / y.shape[0])


@njit(cache=True)
def initial_step(y, d, heff, jumps, sup, atol, rtol):
    f0 = np.empty_like(y)
    _rhs(y, d, heff, jumps, sup, f0)
    d0 = 0.0
    d1 = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * abs(y[i])
        d0 += (abs(y[i]) / sc) ** 2
        d1 += (abs(f0[i]) / sc) ** 2
    d0 = np.sqrt(d0 / y.shape[0])
    d1 = np.sqrt(d1 / y.shape[0])
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return 0.01 * d0 / d1


@njit(cache=True)
def integrate_targets(y0, t0, targets, d, heff, jumps, sup, proj, settle, h,
                      atol, rtol, stride, stop_level, settle_level):
    """Advance ``y0`` from ``t0`` through each time in ``targets`` exactly.

    Returns ``(pg, checkpoints, n_done, status, t_fail, y, h)`` where ``pg``
    holds the projector expectation at every reached target and
    ``checkpoints[k]`` the state at target ``k * stride``.
    """
    n = targets.shape[0]
    n_ck = (n - 1) // stride + 1 if n > 0 else 0
    pg = np.full(n, np.nan)
    ck = np.zeros((n_ck, y0.shape[0]), dtype=np.complex128)
    m = y0.shape[0]
    y = y0.copy()
    ynew = np.empty_like(y)
    tmp = np.empty_like(y)
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    k5 = np.empty_like(y)
    k6 = np.empty_like(y)
    k7 = np.empty_like(y)
    err = np.empty_like(y)
    t = t0
    _rhs(y, d, heff, jumps, sup, k1)
    check_stop = not np.isnan(stop_level)
    check_settle = settle.shape[0] > 0
    n_done = 0
    for k in range(n):
        target = targets[k]
        while t < target:
            hmin = 1e-13 * max(1.0, abs(t))
            if not h >= hmin:
                return pg, ck, n_done, UNDERFLOW, t, y, h
            clipped = t + h >= target
            hs = target - t if clipped else h
            for i in range(m):
                tmp[i] = y[i] + hs * (A21 * k1[i])
            _rhs(tmp, d, heff, jumps, sup, k2)
            for i in range(m):
                tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
            _rhs(tmp, d, heff, jumps, sup, k3)
            for i in range(m):
                tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(tmp, d, heff, jumps, sup, k4)
            for i in range(m):
                tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(tmp, d, heff, jumps, sup, k5)
            for i in range(m):
                tmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                      + A65 * k5[i])
            _rhs(tmp, d, heff, jumps, sup, k6)
            for i in range(m):
                ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            _rhs(ynew, d, heff, jumps, sup, k7)
            for i in range(m):
                err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                               + E7 * k7[i])
            en = _err_norm(err, y, ynew, atol, rtol)
            if en <= 1.0:
                fac = MAX_FACTOR if en == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * en ** -0.2))
                t = target if clipped else t + hs
                y[:] = ynew
                # first-same-as-last: k7 is the derivative at the accepted point
                k1[:] = k7
                # a clipped step must not shrink the proposal of the free-running controller
                h = max(h, hs * fac) if clipped else hs * fac
            elif en > 1.0:
                h = hs * max(MIN_FACTOR, SAFETY * en ** -0.2)
            else:
                # non-finite error estimate
                h = hs * MIN_FACTOR
        pg[k] = _expect(y, d, proj)
        if k % stride == 0:
            ck[k // stride] = y
        n_done = k + 1
        if check_stop and pg[k] >= stop_level:
            return pg, ck, n_done, STOPPED, t, y, h
        if check_settle and _expect(y, d, settle) <= settle_level:
            return pg, ck, n_done, SETTLED, t, y, h
    return pg, ck, n_done, OK, t, y, h
