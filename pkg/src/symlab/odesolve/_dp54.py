"""Dormand-Prince 5(4) stepping kernel for the reduced-ODE family.

One kernel serves every instance: R'' = -(A R^5 + B R^3 + (c0 + cq s^2) R
+ D R^-3).  The same source compiles two ways: a numba.njit build for
speed and the plain-Python/numpy build as the fallback; the active
backend is chosen by the SYMLAB_BACKEND environment variable (see
`symlab.odesolve.backend_name`).  Dense output stores the seven stage
derivatives per accepted step (Shampine's quartic interpolant).
"""

from __future__ import annotations

import numpy as np

# extended Butcher tableau
C_NODES = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

A_TAB = np.zeros((7, 7))
A_TAB[1, 0] = 1 / 5
A_TAB[2, :2] = (3 / 40, 9 / 40)
A_TAB[3, :3] = (44 / 45, -56 / 15, 32 / 9)
A_TAB[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
A_TAB[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
A_TAB[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)

B_HIGH = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
ERR_W = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                  -17253 / 339200, 22 / 525, -1 / 40])

# dense-output polynomial weights: y(s0 + th*h) = y0 + h * sum_i k_i * q_i(th)
P_TAB = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

STATUS_DONE = 0
STATUS_POLE = 1
STATUS_BLOWUP = 2
STATUS_UNDERFLOW = 3
STATUS_MAXSTEPS = 4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BETA = 0.04            # PI controller memory weight
ALPHA = 1 / 5 - 0.75 * BETA


def _core_source(A, B, c0, cq, D, r0, rp0, s0, s1, rtol, atol,
                 pole_guard, blow_guard, max_steps,
                 sig_out, y_out, k_out, h_out):
    """Adaptive DP5(4) loop; fills the dense-output arrays in place.

    Returns (status, n_accepted, n_rejected, stop_position)."""
    direction = 1.0 if s1 >= s0 else -1.0
    span = abs(s1 - s0)
    s = s0
    y0 = r0
    y1 = rp0

    # first derivative; two-stage initial step estimate (trial Euler step)
    f0_0 = y1
    rr = y0
    acc = A * rr ** 5 + B * rr ** 3 + (c0 + cq * s * s) * rr
    if D != 0.0:
        acc += D / rr ** 3
    f0_1 = -acc
    scale0 = atol + rtol * abs(y0)
    scale1 = atol + rtol * abs(y1)
    d0 = np.sqrt(0.5 * ((y0 / scale0) ** 2 + (y1 / scale1) ** 2))
    d1 = np.sqrt(0.5 * ((f0_0 / scale0) ** 2 + (f0_1 / scale1) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    ye0 = y0 + h0 * direction * f0_0
    ye1 = y1 + h0 * direction * f0_1
    if D != 0.0 and ye0 == 0.0:
        h = h0
    else:
        se = s + h0 * direction
        acc = A * ye0 ** 5 + B * ye0 ** 3 + (c0 + cq * se * se) * ye0
        if D != 0.0:
            acc += D / ye0 ** 3
        fe0 = ye1
        fe1 = -acc
        d2 = np.sqrt(0.5 * (((fe0 - f0_0) / scale0) ** 2
                            + ((fe1 - f0_1) / scale1) ** 2)) / h0
        dm = max(d1, d2)
        if dm > 1e-15:
            h1 = (0.01 / dm) ** 0.2
        else:
            h1 = max(1e-6, h0 * 1e3)
        h = min(100.0 * h0, h1)
    if span > 0 and h > span:
        h = span
    if h <= 0 or not np.isfinite(h):
        h = 1e-6

    err_prev = 1.0
    n_acc = 0
    n_rej = 0
    k = np.zeros((7, 2))
    k[0, 0] = f0_0
    k[0, 1] = f0_1
    have_fsal = True

    while direction * (s1 - s) > 1e-14 * max(1.0, abs(s)):
        if n_acc >= max_steps:
            sig_out[n_acc] = s
            y_out[n_acc, 0] = y0
            y_out[n_acc, 1] = y1
            return STATUS_MAXSTEPS, n_acc, n_rej, s
        if h > abs(s1 - s):
            h = abs(s1 - s)
        if h < 1e-14 * max(1.0, abs(s)):
            sig_out[n_acc] = s
            y_out[n_acc, 0] = y0
            y_out[n_acc, 1] = y1
            return STATUS_UNDERFLOW, n_acc, n_rej, s
        hs = direction * h
        if not have_fsal:
            rr = y0
            acc = A * rr ** 5 + B * rr ** 3 + (c0 + cq * s * s) * rr
            if D != 0.0:
                acc += D / rr ** 3
            k[0, 0] = y1
            k[0, 1] = -acc
            have_fsal = True
        bad = False
        for i in range(1, 7):
            ty0 = y0
            ty1 = y1
            for j in range(i):
                aij = A_TAB[i, j]
                if aij != 0.0:
                    ty0 += hs * aij * k[j, 0]
                    ty1 += hs * aij * k[j, 1]
            ss = s + C_NODES[i] * hs
            if D != 0.0 and ty0 == 0.0:
                bad = True
                break
            rr = ty0
            acc = A * rr ** 5 + B * rr ** 3 + (c0 + cq * ss * ss) * rr
            if D != 0.0:
                acc += D / rr ** 3
            k[i, 0] = ty1
            k[i, 1] = -acc
        if not bad:
            ny0 = y0
            ny1 = y1
            e0 = 0.0
            e1 = 0.0
            for i in range(7):
                if B_HIGH[i] != 0.0:
                    ny0 += hs * B_HIGH[i] * k[i, 0]
                    ny1 += hs * B_HIGH[i] * k[i, 1]
                if ERR_W[i] != 0.0:
                    e0 += hs * ERR_W[i] * k[i, 0]
                    e1 += hs * ERR_W[i] * k[i, 1]
            sc0 = atol + rtol * max(abs(y0), abs(ny0))
            sc1 = atol + rtol * max(abs(y1), abs(ny1))
            err = np.sqrt(0.5 * ((e0 / sc0) ** 2 + (e1 / sc1) ** 2))
            finite = np.isfinite(err) and np.isfinite(ny0) and np.isfinite(ny1)
        else:
            err = 2.0
            finite = False
            ny0 = y0
            ny1 = y1
        if finite and err <= 1.0:
            sig_out[n_acc] = s
            h_out[n_acc] = hs
            y_out[n_acc, 0] = y0
            y_out[n_acc, 1] = y1
            for i in range(7):
                k_out[n_acc, i, 0] = k[i, 0]
                k_out[n_acc, i, 1] = k[i, 1]
            n_acc += 1
            s = s + hs
            y0 = ny0
            y1 = ny1
            k[0, 0] = k[6, 0]
            k[0, 1] = k[6, 1]
            have_fsal = True
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err ** (-ALPHA) * err_prev ** BETA
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            h = h * factor
            err_prev = max(err, 1e-10)
            if D != 0.0 and abs(y0) < pole_guard:
                sig_out[n_acc] = s
                y_out[n_acc, 0] = y0
                y_out[n_acc, 1] = y1
                return STATUS_POLE, n_acc, n_rej, s
            if blow_guard > 0.0 and abs(y0) >= blow_guard:
                sig_out[n_acc] = s
                y_out[n_acc, 0] = y0
                y_out[n_acc, 1] = y1
                return STATUS_BLOWUP, n_acc, n_rej, s
        else:
            n_rej += 1
            if finite:
                factor = SAFETY * err ** (-1 / 5)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                elif factor > 1.0:
                    factor = 1.0
            else:
                factor = 0.5
            h = h * factor
            have_fsal = True  # k[0] still valid at unchanged (s, y)
            err_prev = 1.0
    sig_out[n_acc] = s
    y_out[n_acc, 0] = y0
    y_out[n_acc, 1] = y1
    return STATUS_DONE, n_acc, n_rej, s


def build_core(use_numba: bool):
    if not use_numba:
        return _core_source
    import numba

    return numba.njit(cache=True, fastmath=False)(_core_source)
