"""Vessel tracking kinematics in body-frame error coordinates.

Poses are plain arrays (x, y, theta); tracking errors are arrays
(x_e, y_e, theta_e) obtained by rotating the reference-minus-actual offset
into the vessel body frame.  After substituting the pivot relation and the
actuator transform, the closed error dynamics split into a drift

    f(x) = ( c w_r sin(th_e) + w_r y_e cos(th_e),
             v_r sin(th_e)  - w_r x_e cos(th_e),
             w_r (1 - cos(th_e)) )

and an input gain

    g(x) = [[-1, y_e], [0, c - x_e], [0, -1]]

acting on the transformed input u = (v, w).  Headings are kept unwrapped:
the quadratic barrier downstream is global in theta_e and wrapping would
tear it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VesselParams",
    "error_from_poses",
    "global_from_error",
    "drift",
    "input_gain",
    "actuator_inputs",
    "linearize",
    "reference_step",
]


@dataclass(frozen=True)
class VesselParams:
    """Pivot distance, reference inputs, and additive noise gains.

    c is the distance of the turning axis ahead of the center of gravity;
    v_r and omega_r are the reference surge and yaw rate; G holds the
    constant diffusion gains (sigma_x, sigma_y, sigma_theta) for the single
    driving Wiener process.
    """

    c: float
    v_r: float
    omega_r: float
    G: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float).reshape(3)
        object.__setattr__(self, "G", G)
        if not np.isfinite([self.c, self.v_r, self.omega_r]).all() or not np.isfinite(G).all():
            raise ValueError("vessel parameters must be finite")
        if self.v_r == 0.0:
            raise ValueError("v_r must be nonzero")
        if self.c == -1.0:
            raise ValueError("pivot distance c = -1 is excluded")


def error_from_poses(ref, actual) -> np.ndarray:
    """Tracking error of ``actual`` against ``ref``, in the actual body frame."""
    xr, yr, thr = np.asarray(ref, dtype=float)
    xg, yg, thg = np.asarray(actual, dtype=float)
    ct, st = np.cos(thg), np.sin(thg)
    dx, dy = xr - xg, yr - yg
    return np.array([dx * ct + dy * st, -dx * st + dy * ct, thr - thg])


def global_from_error(ref, e) -> np.ndarray:
    """Inverse of :func:`error_from_poses` for a fixed reference pose."""
    xr, yr, thr = np.asarray(ref, dtype=float)
    xe, ye, the = np.asarray(e, dtype=float)
    thg = thr - the
    ct, st = np.cos(thg), np.sin(thg)
    # invert the body-frame rotation: (dx, dy) = R(thg)^T (xe, ye)
    dx = xe * ct - ye * st
    dy = xe * st + ye * ct
    return np.array([xr - dx, yr - dy, thg])


def drift(x, p: VesselParams) -> np.ndarray:
    """Error-dynamics drift f(x); vanishes identically at x = 0."""
    xe, ye, te = np.asarray(x, dtype=float)
    st, ct = np.sin(te), np.cos(te)
    return np.array([
        p.c * p.omega_r * st + p.omega_r * ye * ct,
        p.v_r * st - p.omega_r * xe * ct,
        p.omega_r * (1.0 - ct),
    ])


def input_gain(x, p: VesselParams) -> np.ndarray:
    """Error-dynamics input gain g(x), shape (3, 2)."""
    xe, ye, _ = np.asarray(x, dtype=float)
    return np.array([
        [-1.0, ye],
        [0.0, p.c - xe],
        [0.0, -1.0],
    ])


def actuator_inputs(x, u, p: VesselParams):
    """Map the transformed input u = (v, w) back to actuator commands.

    Returns (v_sur, omega_yaw) = (v_r cos th_e + v, omega_r cos th_e + w).
    """
    te = float(np.asarray(x, dtype=float)[2])
    v, w = np.asarray(u, dtype=float)
    ct = np.cos(te)
    return p.v_r * ct + v, p.omega_r * ct + w


def linearize(p: VesselParams):
    """Jacobian pair (A, B) of the error dynamics at the origin.

    A = df/dx|_0, B = g(0).  The pair is controllable whenever v_r != 0 and
    c != -1, which VesselParams enforces.
    """
    A = np.array([
        [0.0, p.omega_r, p.c * p.omega_r],
        [-p.omega_r, 0.0, p.v_r],
        [0.0, 0.0, 0.0],
    ])
    B = input_gain(np.zeros(3), p)
    return A, B


def reference_step(r, p: VesselParams, dt: float) -> np.ndarray:
    """One explicit Euler step of the reference pose model.

    Plotting plumbing only; kept at the same dt as the SDE grid so
    reconstructed global trajectories stay time aligned.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    xr, yr, thr = np.asarray(r, dtype=float)
    ct, st = np.cos(thr), np.sin(thr)
    return np.array([
        xr + dt * (p.v_r * ct + p.c * p.omega_r * st),
        yr + dt * (p.v_r * st - p.c * p.omega_r * ct),
        thr + dt * p.omega_r,
    ])
