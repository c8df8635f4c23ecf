"""Tracking and safety-compensation control laws.

Three controllers act on the error state x = (x_e, y_e, theta_e):

* ``tra``      LQ tracking feedback u = -K x with K = R^-1 B^T P from the
               continuous algebraic Riccati equation.
* ``tra+com``  adds the linear safety compensator u_com = -R'^-1 B^T P x,
               so the closed-loop gain is (R^-1 + R'^-1) B^T P.
* ``tra+nlc``  adds the nonlinear compensator: a feedback that, when the
               uncompensated barrier drift is too small, redirects the input
               so the barrier generator meets the design rate b' exactly,
               faded out between barrier levels mu and M'.

Sign convention: the gain is K = R^-1 B^T P (so u = -K x); this reproduces
the reference gain and closed-loop matrices used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .vessel import VesselParams, drift, input_gain

__all__ = [
    "MODES",
    "LqrDesign",
    "CompensatorConfig",
    "design_lqr",
    "compensator_gain",
    "u_tra",
    "u_com",
    "gamma",
    "phi_s",
    "u_nlc",
    "total_controller",
]

MODES = ("tra", "tra+com", "tra+nlc")


@dataclass(frozen=True)
class LqrDesign:
    """LQ tracking design: inputs, Riccati solution, and derived matrices.

    Satisfies P Abar + Abar^T P = -Q_eff with Q_eff = Q' + P B R^-1 B^T P,
    checked at construction.
    """

    A: np.ndarray
    B: np.ndarray
    Q_prime: np.ndarray
    R: np.ndarray
    P: np.ndarray
    K: np.ndarray
    Abar: np.ndarray
    Q_eff: np.ndarray


@dataclass(frozen=True)
class CompensatorConfig:
    """Safety compensator parameters.

    R_prime weights the linear compensator; b_prime is the nonlinear design
    rate; M is the barrier level, mu the inner margin, M_prime the blend
    level with mu < M_prime <= M; eps_den guards the compensator denominator
    2 x'P g g'P x near the zero-authority set.
    """

    R_prime: np.ndarray
    b_prime: float
    M: float
    mu: float
    M_prime: float
    eps_den: float = 1e-10

    def __post_init__(self):
        Rp = np.asarray(self.R_prime, dtype=float)
        object.__setattr__(self, "R_prime", Rp)
        if not linalg.is_pos_def(Rp):
            raise ValueError("R_prime must be symmetric positive definite")
        if not (self.M > 0.0):
            raise ValueError("M must be positive")
        if not (0.0 < self.mu < self.M):
            raise ValueError("mu must lie in (0, M)")
        if not (self.mu < self.M_prime <= self.M):
            raise ValueError("M_prime must lie in (mu, M]")
        if not (self.b_prime > 0.0):
            raise ValueError("b_prime must be positive")
        if not (self.eps_den > 0.0):
            raise ValueError("eps_den must be positive")


def design_lqr(A, B, Q_prime, R, lyap_check_tol: float = 1e-6) -> LqrDesign:
    """Solve the LQ problem and bundle the derived closed-loop matrices."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q_prime = np.asarray(Q_prime, dtype=float)
    R = np.asarray(R, dtype=float)
    P = linalg.solve_care(A, B, Q_prime, R)
    K = np.linalg.solve(R, B.T @ P)
    Abar = A - B @ K
    Q_eff = Q_prime + P @ B @ np.linalg.solve(R, B.T @ P)
    resid = float(np.abs(P @ Abar + Abar.T @ P + Q_eff).max())
    if resid > lyap_check_tol:
        raise linalg.SolverFailureError(
            f"closed-loop Lyapunov identity violated ({resid:.3e})", residual=resid)
    return LqrDesign(A=A, B=B, Q_prime=Q_prime, R=R, P=P, K=K, Abar=Abar, Q_eff=Q_eff)


def compensator_gain(d: LqrDesign, cfg: CompensatorConfig) -> np.ndarray:
    """Linear compensator gain K_com = R'^-1 B^T P."""
    return np.linalg.solve(cfg.R_prime, d.B.T @ d.P)


def u_tra(x, d: LqrDesign) -> np.ndarray:
    """LQ tracking feedback -K x."""
    return -(d.K @ np.asarray(x, dtype=float))


def u_com(x, d: LqrDesign, cfg: CompensatorConfig) -> np.ndarray:
    """Linear safety compensator -R'^-1 B^T P x."""
    return -np.linalg.solve(cfg.R_prime, d.B.T @ (d.P @ np.asarray(x, dtype=float)))


def gamma(x, d: LqrDesign, cfg: CompensatorConfig, p: VesselParams) -> float:
    """Activation indicator for the nonlinear compensator.

    gamma(x) = 2 x'P (f(x) + g(x) u_tra(x) + b' G G'P x) + G'P G.  Positive
    gamma means the uncompensated generator falls short of the design rate
    b' and the compensator must act.
    """
    x = np.asarray(x, dtype=float)
    px = d.P @ x
    gp = float(p.G @ px)
    gtpg = float(p.G @ d.P @ p.G)
    vec = drift(x, p) + input_gain(x, p) @ u_tra(x, d) + cfg.b_prime * gp * p.G
    return 2.0 * float(px @ vec) + gtpg


def phi_s(x, d: LqrDesign, cfg: CompensatorConfig, p: VesselParams) -> np.ndarray:
    """Active branch of the nonlinear compensator.

    For gamma(x) > 0 and denominator 2 x'P g g'P x above eps_den:

        phi_s(x) = -u_tra(x)
                   - [2 x'P (f(x) + b' G G'P x) + G'P G] / (2 x'P g g'P x) g'P x

    and zero otherwise.  With u = u_tra + phi_s the barrier generator equals
    b' H_sigma(h) exactly on the active branch.
    """
    x = np.asarray(x, dtype=float)
    px = d.P @ x
    w = input_gain(x, p).T @ px  # g'(x) P x
    den = 2.0 * float(w @ w)
    if gamma(x, d, cfg, p) <= 0.0 or den <= cfg.eps_den:
        return np.zeros(2)
    gp = float(p.G @ px)
    gtpg = float(p.G @ d.P @ p.G)
    num = 2.0 * float(px @ (drift(x, p) + cfg.b_prime * gp * p.G)) + gtpg
    return -u_tra(x, d) - (num / den) * w


def u_nlc(x, d: LqrDesign, cfg: CompensatorConfig, p: VesselParams) -> np.ndarray:
    """Nonlinear safety compensator: phi_s faded out between levels mu and M'.

    Full phi_s for h(x) <= mu, zero for h(x) >= M', and the linear blend
    phi_s * (h - M')/(mu - M') in between; continuous across both surfaces.
    """
    x = np.asarray(x, dtype=float)
    h = cfg.M - float(x @ d.P @ x)
    if h >= cfg.M_prime:
        return np.zeros(2)
    blend = 1.0 if h <= cfg.mu else (h - cfg.M_prime) / (cfg.mu - cfg.M_prime)
    return blend * phi_s(x, d, cfg, p)


def total_controller(mode: str, x, d: LqrDesign, cfg: CompensatorConfig,
                     p: VesselParams) -> np.ndarray:
    """Total input for one of the modes in MODES."""
    if mode == "tra":
        return u_tra(x, d)
    if mode == "tra+com":
        return u_tra(x, d) + u_com(x, d, cfg)
    if mode == "tra+nlc":
        return u_tra(x, d) + u_nlc(x, d, cfg, p)
    raise ValueError(f"unknown controller mode {mode!r}; expected one of {MODES}")
