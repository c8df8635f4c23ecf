"""Pure numpy path-integration kernels (fallback backend).

Same call signatures as the compiled extension ``vesselsafe._core``; the
ensemble runner vectorizes across paths, stepping the whole state block per
time step.  Controller evaluation uses the left endpoint of each step, and
the per-step noise increment enters as G * dW with a scalar dW per path.

Mode codes: 0 = tra, 1 = tra+com, 2 = tra+nlc.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _controls(X, px, hvals, mode, c, v_r, omega_r, G, K, Kcom,
              b_prime, mu, M_prime, eps_den, gtpg):
    """Total input, compensator part, and denominator-guard hits for X (n, 3)."""
    u_tra = -(X @ K.T)
    if mode == 0:
        return u_tra, np.zeros_like(u_tra), 0
    if mode == 1:
        ucom = -(X @ Kcom.T)
        return u_tra + ucom, ucom, 0
    # tra+nlc
    xe, ye, te = X[:, 0], X[:, 1], X[:, 2]
    st, ct = np.sin(te), np.cos(te)
    f0 = c * omega_r * st + omega_r * ye * ct
    f1 = v_r * st - omega_r * xe * ct
    f2 = omega_r * (1.0 - ct)
    w0 = -px[:, 0]
    w1 = px[:, 0] * ye + px[:, 1] * (c - xe) - px[:, 2]
    den = 2.0 * (w0 * w0 + w1 * w1)
    gp = px @ G
    num = 2.0 * (px[:, 0] * (f0 + b_prime * gp * G[0])
                 + px[:, 1] * (f1 + b_prime * gp * G[1])
                 + px[:, 2] * (f2 + b_prime * gp * G[2])) + gtpg
    gam = num + 2.0 * (w0 * u_tra[:, 0] + w1 * u_tra[:, 1])
    active = (gam > 0.0) & (den > eps_den)
    guarded = int(np.sum((gam > 0.0) & (den <= eps_den)))
    scale = np.where(active, num / np.where(den > eps_den, den, 1.0), 0.0)
    blend = np.clip((hvals - M_prime) / (mu - M_prime), 0.0, 1.0)
    unlc0 = blend * np.where(active, -u_tra[:, 0] - scale * w0, 0.0)
    unlc1 = blend * np.where(active, -u_tra[:, 1] - scale * w1, 0.0)
    unlc = np.stack([unlc0, unlc1], axis=1)
    return u_tra + unlc, unlc, guarded


def _vessel_rhs(X, U, c, v_r, omega_r):
    """Drift f(X) + g(X) U for a state block."""
    xe, ye, te = X[:, 0], X[:, 1], X[:, 2]
    st, ct = np.sin(te), np.cos(te)
    f0 = c * omega_r * st + omega_r * ye * ct
    f1 = v_r * st - omega_r * xe * ct
    f2 = omega_r * (1.0 - ct)
    return np.stack([f0 - U[:, 0] + ye * U[:, 1],
                     f1 + (c - xe) * U[:, 1],
                     f2 - U[:, 1]], axis=1)


def run_vessel_block(X, dW, dt, mode, c, v_r, omega_r, G, P, K, Kcom,
                     b_prime, M, mu, M_prime, eps_den,
                     stop_on_exit, step_offset, min_h, exit_idx):
    """Advance the ensemble X (n, 3) through dW.shape[1] steps in place.

    min_h and exit_idx are running reductions over grid points
    step_offset .. step_offset + n_steps - 1 (the grid point *after* the
    last increment of this block is left to the caller).  With stop_on_exit
    a path freezes at its first grid point with h <= 0.
    """
    n_steps = dW.shape[1]
    gtpg = float(G @ P @ G)
    for i in range(n_steps):
        px = X @ P
        hvals = M - np.einsum("ij,ij->i", px, X)
        np.minimum(min_h, hvals, out=min_h)
        newly = (hvals <= 0.0) & (exit_idx < 0)
        if newly.any():
            exit_idx[newly] = step_offset + i
        U, _, _ = _controls(X, px, hvals, mode, c, v_r, omega_r, G, K, Kcom,
                            b_prime, mu, M_prime, eps_den, gtpg)
        Xn = X + dt * _vessel_rhs(X, U, c, v_r, omega_r) + dW[:, i][:, None] * G[None, :]
        if stop_on_exit:
            frozen = exit_idx >= 0
            X[~frozen] = Xn[~frozen]
        else:
            X[:] = Xn


def run_vessel_record(x0, dW, dt, mode, c, v_r, omega_r, G, P, K, Kcom,
                      b_prime, M, mu, M_prime, eps_den, stop_on_exit):
    """Single-path run recording state, barrier, and inputs at every grid point.

    Returns (states, u_total, u_comp, h_vals, exit_index, guard_hits);
    arrays cover grid points 0..N, or 0..e when stop_on_exit truncates at
    exit index e.  exit_index is -1 when the path never reaches h <= 0;
    guard_hits counts evaluations where the compensator wanted to act but
    its denominator sat at or below eps_den.
    """
    n_steps = dW.shape[0]
    gtpg = float(G @ P @ G)
    states = np.empty((n_steps + 1, 3))
    u_total = np.empty((n_steps + 1, 2))
    u_comp = np.empty((n_steps + 1, 2))
    h_vals = np.empty(n_steps + 1)
    X = np.asarray(x0, dtype=float).reshape(1, 3).copy()
    exit_index = -1
    guard_hits = 0
    last = n_steps
    for i in range(n_steps + 1):
        px = X @ P
        hval = M - float(np.einsum("ij,ij->i", px, X)[0])
        U, Ucomp, guarded = _controls(X, px, np.array([hval]), mode, c, v_r,
                                      omega_r, G, K, Kcom, b_prime, mu,
                                      M_prime, eps_den, gtpg)
        guard_hits += guarded
        states[i] = X[0]
        u_total[i] = U[0]
        u_comp[i] = Ucomp[0]
        h_vals[i] = hval
        if exit_index < 0 and hval <= 0.0:
            exit_index = i
            if stop_on_exit:
                last = i
                break
        if i < n_steps:
            X = X + dt * _vessel_rhs(X, U, c, v_r, omega_r) + dW[i] * G[None, :]
    n_keep = last + 1
    return (states[:n_keep], u_total[:n_keep], u_comp[:n_keep],
            h_vals[:n_keep], exit_index, guard_hits)


def run_linear_block(X, dW, dt, Abar, G):
    """Advance dx = Abar x dt + G dW for the ensemble X (n, 3) in place."""
    n_steps = dW.shape[1]
    Ad = np.eye(3) + dt * Abar
    for i in range(n_steps):
        X[:] = X @ Ad.T + dW[:, i][:, None] * G[None, :]
