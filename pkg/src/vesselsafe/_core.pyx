# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path-integration kernels.

Mirrors vesselsafe._core_py: same signatures, same stepping order, same
left-endpoint controller evaluation.  Mode codes: 0 = tra, 1 = tra+com,
2 = tra+nlc.
"""

import numpy as np

from libc.math cimport sin, cos

BACKEND_NAME = "compiled"


cdef inline int _step_path(double* x, double dw, double dt, int mode,
                           double c, double v_r, double omega_r,
                           double* G, double* P, double* K, double* Kcom,
                           double b_prime, double M, double mu, double M_prime,
                           double eps_den, double gtpg,
                           double* u_out, double* ucomp_out, double h_in) noexcept nogil:
    """One Euler-Maruyama step; writes the applied input and compensator part.

    Returns 1 when the compensator wanted to act but its denominator sat at
    or below eps_den (the zero-authority guard), else 0.
    """
    cdef double xe = x[0], ye = x[1], te = x[2]
    cdef double px0, px1, px2, st, ct, f0, f1, f2
    cdef double ut0, ut1, uc0, uc1, u0, u1
    cdef double w0, w1, den, gp, num, gam, scale, blend, d0, d1, d2
    cdef int guarded = 0

    px0 = xe * P[0] + ye * P[3] + te * P[6]
    px1 = xe * P[1] + ye * P[4] + te * P[7]
    px2 = xe * P[2] + ye * P[5] + te * P[8]
    st = sin(te)
    ct = cos(te)
    f0 = c * omega_r * st + omega_r * ye * ct
    f1 = v_r * st - omega_r * xe * ct
    f2 = omega_r * (1.0 - ct)

    ut0 = -(K[0] * xe + K[1] * ye + K[2] * te)
    ut1 = -(K[3] * xe + K[4] * ye + K[5] * te)
    uc0 = 0.0
    uc1 = 0.0
    if mode == 1:
        uc0 = -(Kcom[0] * xe + Kcom[1] * ye + Kcom[2] * te)
        uc1 = -(Kcom[3] * xe + Kcom[4] * ye + Kcom[5] * te)
    elif mode == 2:
        w0 = -px0
        w1 = px0 * ye + px1 * (c - xe) - px2
        den = 2.0 * (w0 * w0 + w1 * w1)
        gp = px0 * G[0] + px1 * G[1] + px2 * G[2]
        num = 2.0 * (px0 * (f0 + b_prime * gp * G[0])
                     + px1 * (f1 + b_prime * gp * G[1])
                     + px2 * (f2 + b_prime * gp * G[2])) + gtpg
        gam = num + 2.0 * (w0 * ut0 + w1 * ut1)
        if gam > 0.0 and den > eps_den:
            scale = num / den
            uc0 = -ut0 - scale * w0
            uc1 = -ut1 - scale * w1
        elif gam > 0.0:
            guarded = 1
        blend = (h_in - M_prime) / (mu - M_prime)
        if blend > 1.0:
            blend = 1.0
        elif blend < 0.0:
            blend = 0.0
        uc0 = blend * uc0
        uc1 = blend * uc1

    u0 = ut0 + uc0
    u1 = ut1 + uc1
    u_out[0] = u0
    u_out[1] = u1
    ucomp_out[0] = uc0
    ucomp_out[1] = uc1

    d0 = f0 - u0 + ye * u1
    d1 = f1 + (c - xe) * u1
    d2 = f2 - u1
    x[0] = xe + dt * d0 + dw * G[0]
    x[1] = ye + dt * d1 + dw * G[1]
    x[2] = te + dt * d2 + dw * G[2]
    return guarded


cdef inline double _hval(double* x, double* P, double M) noexcept nogil:
    cdef double px0 = x[0] * P[0] + x[1] * P[3] + x[2] * P[6]
    cdef double px1 = x[0] * P[1] + x[1] * P[4] + x[2] * P[7]
    cdef double px2 = x[0] * P[2] + x[1] * P[5] + x[2] * P[8]
    return M - (px0 * x[0] + px1 * x[1] + px2 * x[2])


def run_vessel_block(double[:, ::1] X, double[:, ::1] dW, double dt, int mode,
                     double c, double v_r, double omega_r, double[::1] G,
                     double[:, ::1] P, double[:, ::1] K, double[:, ::1] Kcom,
                     double b_prime, double M, double mu, double M_prime,
                     double eps_den, bint stop_on_exit, long long step_offset,
                     double[::1] min_h, long long[::1] exit_idx):
    """Advance the ensemble through dW.shape[1] steps in place (see _core_py)."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_steps = dW.shape[1]
    cdef Py_ssize_t i, j
    cdef double hv, gtpg
    cdef double u[2]
    cdef double ucomp[2]
    gtpg = 0.0
    cdef Py_ssize_t a, bb
    for a in range(3):
        for bb in range(3):
            gtpg += G[a] * P[a, bb] * G[bb]
    with nogil:
        for j in range(n):
            for i in range(n_steps):
                if stop_on_exit and exit_idx[j] >= 0:
                    break
                hv = _hval(&X[j, 0], &P[0, 0], M)
                if hv < min_h[j]:
                    min_h[j] = hv
                if hv <= 0.0 and exit_idx[j] < 0:
                    exit_idx[j] = step_offset + i
                    if stop_on_exit:
                        break
                _step_path(&X[j, 0], dW[j, i], dt, mode, c, v_r, omega_r,
                           &G[0], &P[0, 0], &K[0, 0], &Kcom[0, 0],
                           b_prime, M, mu, M_prime, eps_den, gtpg,
                           u, ucomp, hv)


def run_vessel_record(double[::1] x0, double[::1] dW, double dt, int mode,
                      double c, double v_r, double omega_r, double[::1] G,
                      double[:, ::1] P, double[:, ::1] K, double[:, ::1] Kcom,
                      double b_prime, double M, double mu, double M_prime,
                      double eps_den, bint stop_on_exit):
    """Single-path run with full recording (see _core_py for the contract)."""
    cdef Py_ssize_t n_steps = dW.shape[0]
    states_arr = np.empty((n_steps + 1, 3))
    u_arr = np.empty((n_steps + 1, 2))
    ucomp_arr = np.empty((n_steps + 1, 2))
    h_arr = np.empty(n_steps + 1)
    cdef double[:, ::1] states = states_arr
    cdef double[:, ::1] u_total = u_arr
    cdef double[:, ::1] u_comp = ucomp_arr
    cdef double[::1] h_vals = h_arr
    cdef double x[3]
    cdef double u[2]
    cdef double ucomp[2]
    cdef double xs[3]
    cdef double hv, gtpg
    cdef Py_ssize_t i, a, bb
    cdef long long exit_index = -1
    cdef long long guard_hits = 0
    cdef Py_ssize_t last = n_steps
    x[0] = x0[0]
    x[1] = x0[1]
    x[2] = x0[2]
    gtpg = 0.0
    for a in range(3):
        for bb in range(3):
            gtpg += G[a] * P[a, bb] * G[bb]
    for i in range(n_steps + 1):
        hv = _hval(x, &P[0, 0], M)
        xs[0] = x[0]
        xs[1] = x[1]
        xs[2] = x[2]
        if i < n_steps:
            guard_hits += _step_path(x, dW[i], dt, mode, c, v_r, omega_r,
                                     &G[0], &P[0, 0], &K[0, 0], &Kcom[0, 0],
                                     b_prime, M, mu, M_prime, eps_den, gtpg,
                                     u, ucomp, hv)
        else:
            # evaluate (not apply) the input at the final grid point
            guard_hits += _step_path(xs, 0.0, 0.0, mode, c, v_r, omega_r,
                                     &G[0], &P[0, 0], &K[0, 0], &Kcom[0, 0],
                                     b_prime, M, mu, M_prime, eps_den, gtpg,
                                     u, ucomp, hv)
        states[i, 0] = xs[0]
        states[i, 1] = xs[1]
        states[i, 2] = xs[2]
        u_total[i, 0] = u[0]
        u_total[i, 1] = u[1]
        u_comp[i, 0] = ucomp[0]
        u_comp[i, 1] = ucomp[1]
        h_vals[i] = hv
        if exit_index < 0 and hv <= 0.0:
            exit_index = i
            if stop_on_exit:
                last = i
                break
    cdef Py_ssize_t n_keep = last + 1
    return (states_arr[:n_keep], u_arr[:n_keep], ucomp_arr[:n_keep],
            h_arr[:n_keep], int(exit_index), int(guard_hits))


def run_linear_block(double[:, ::1] X, double[:, ::1] dW, double dt,
                     double[:, ::1] Abar, double[::1] G):
    """Advance dx = Abar x dt + G dW for the ensemble in place."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_steps = dW.shape[1]
    cdef Py_ssize_t i, j
    cdef double a00, a01, a02, a10, a11, a12, a20, a21, a22
    cdef double x0, x1, x2, dw
    # discrete one-step matrix I + dt * Abar
    a00 = 1.0 + dt * Abar[0, 0]
    a01 = dt * Abar[0, 1]
    a02 = dt * Abar[0, 2]
    a10 = dt * Abar[1, 0]
    a11 = 1.0 + dt * Abar[1, 1]
    a12 = dt * Abar[1, 2]
    a20 = dt * Abar[2, 0]
    a21 = dt * Abar[2, 1]
    a22 = 1.0 + dt * Abar[2, 2]
    with nogil:
        for j in range(n):
            x0 = X[j, 0]
            x1 = X[j, 1]
            x2 = X[j, 2]
            for i in range(n_steps):
                dw = dW[j, i]
                x0, x1, x2 = (a00 * x0 + a01 * x1 + a02 * x2 + dw * G[0],
                              a10 * x0 + a11 * x1 + a12 * x2 + dw * G[1],
                              a20 * x0 + a21 * x1 + a22 * x2 + dw * G[2])
            X[j, 0] = x0
            X[j, 1] = x1
            X[j, 2] = x2
