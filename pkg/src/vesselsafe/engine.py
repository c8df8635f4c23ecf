"""Euler-Maruyama integration of the controlled error dynamics.

The driving noise is additive (constant G), so the explicit scheme is also
exact in the diffusion term.  The controller is evaluated at the left
endpoint of each step and held constant across it.  Exit from the safe set
is detected on the time grid only, which biases safety estimates slightly
upward; this is documented where estimates are reported.

Increments come from the counter-based streams in :mod:`vesselsafe.rng`,
generated in time blocks, so memory stays bounded for long horizons and
results are independent of the block size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .backend import get_backend
from .control import MODES, CompensatorConfig, LqrDesign, compensator_gain
from .rng import RngStream, unit_normals
from .vessel import VesselParams, drift, input_gain

__all__ = [
    "NumericalBlowupError",
    "SamplePath",
    "em_step",
    "simulate_path",
    "ensemble_min_h",
    "simulate_linear_final",
]

DEFAULT_BLOCK_STEPS = 20_000

_MODE_CODES = {"tra": 0, "tra+com": 1, "tra+nlc": 2}

logger = logging.getLogger(__name__)


class NumericalBlowupError(RuntimeError):
    """Raised when a simulated state stops being finite."""

    def __init__(self, message: str, step_index: int, path_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index
        self.path_index = path_index


@dataclass(frozen=True)
class SamplePath:
    """One simulated trajectory on a uniform grid.

    Arrays cover grid points 0..N (or up to the exit index when integration
    stopped there); ``h_values[k]`` is the barrier at ``states[k]``;
    ``inputs[k]`` is the total input applied over step k (evaluated, not
    applied, at the final point) and ``compensator[k]`` its safety part.
    ``guard_triggers`` counts controller evaluations suppressed by the
    eps_den denominator guard (zero-authority states); nonzero counts are
    also logged.
    """

    dt: float
    times: np.ndarray
    states: np.ndarray
    h_values: np.ndarray
    inputs: np.ndarray
    compensator: np.ndarray
    exited: bool
    exit_index: int | None
    mode: str
    stream: RngStream
    guard_triggers: int = 0


def _kernel_args(mode: str, d: LqrDesign, cfg: CompensatorConfig, p: VesselParams):
    if mode not in MODES:
        raise ValueError(f"unknown controller mode {mode!r}; expected one of {MODES}")
    Kcom = compensator_gain(d, cfg) if mode == "tra+com" else np.zeros_like(d.K)
    return (
        _MODE_CODES[mode], p.c, p.v_r, p.omega_r,
        np.ascontiguousarray(p.G, dtype=float),
        np.ascontiguousarray(d.P, dtype=float),
        np.ascontiguousarray(d.K, dtype=float),
        np.ascontiguousarray(Kcom, dtype=float),
        cfg.b_prime, cfg.M, cfg.mu, cfg.M_prime, cfg.eps_den,
    )


def _grid(T: float, dt: float) -> int:
    if dt <= 0.0 or T <= 0.0 or dt > T:
        raise ValueError("require 0 < dt <= T")
    return int(round(T / dt))


def em_step(x, u, dW: float, dt: float, p: VesselParams) -> np.ndarray:
    """Single Euler-Maruyama step x + (f(x) + g(x)u) dt + G dW.

    Reference implementation of the update rule the kernels apply; used by
    tests as an oracle and convenient for one-off stepping.
    """
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return x + dt * (drift(x, p) + input_gain(x, p) @ u) + dW * p.G


def simulate_path(x0, mode: str, d: LqrDesign, cfg: CompensatorConfig,
                  p: VesselParams, T: float, dt: float, stream: RngStream,
                  stop_on_exit: bool = False, backend: str | None = None) -> SamplePath:
    """Simulate one path with full recording of state, barrier, and inputs."""
    n_steps = _grid(T, dt)
    kern = get_backend(backend)
    args = _kernel_args(mode, d, cfg, p)
    dW = np.sqrt(dt) * unit_normals(stream, 0, n_steps)
    states, u_total, u_comp, h_vals, exit_index, guard_hits = kern.run_vessel_record(
        np.ascontiguousarray(x0, dtype=float), dW, dt, *args, stop_on_exit)
    if not np.isfinite(states).all():
        bad = int(np.argmax(~np.isfinite(states).all(axis=1)))
        raise NumericalBlowupError(f"non-finite state at step {bad}", step_index=bad)
    if guard_hits:
        logger.warning("stream (%d, %d) mode %s: eps_den guard suppressed the "
                       "compensator at %d grid point(s)",
                       stream.seed, stream.stream_id, mode, guard_hits)
    n_pts = states.shape[0]
    return SamplePath(
        dt=dt,
        times=dt * np.arange(n_pts),
        states=states,
        h_values=h_vals,
        inputs=u_total,
        compensator=u_comp,
        exited=exit_index >= 0,
        exit_index=exit_index if exit_index >= 0 else None,
        mode=mode,
        stream=stream,
        guard_triggers=int(guard_hits),
    )


def ensemble_min_h(x0, mode: str, d: LqrDesign, cfg: CompensatorConfig,
                   p: VesselParams, T: float, dt: float, seed: int,
                   n_paths: int, stop_on_exit: bool = True,
                   backend: str | None = None,
                   block_steps: int = DEFAULT_BLOCK_STEPS):
    """Run n_paths paths tracking only min h and first-exit index.

    Path j uses stream (seed, j).  Returns (min_h, exit_idx) arrays; exit
    index -1 means the path stayed in the safe set.  The reduction is
    independent of block size and path ordering.
    """
    n_steps = _grid(T, dt)
    kern = get_backend(backend)
    args = _kernel_args(mode, d, cfg, p)
    sdt = np.sqrt(dt)
    X = np.tile(np.asarray(x0, dtype=float), (n_paths, 1))
    min_h = np.full(n_paths, np.inf)
    exit_idx = np.full(n_paths, -1, dtype=np.int64)
    for start in range(0, n_steps, block_steps):
        nb = min(block_steps, n_steps - start)
        dW = np.empty((n_paths, nb))
        for j in range(n_paths):
            dW[j] = sdt * unit_normals(RngStream(seed, j), start, nb)
        kern.run_vessel_block(X, dW, dt, *args, stop_on_exit,
                              start, min_h, exit_idx)
        if not np.isfinite(X).all():
            bad = int(np.argmax(~np.isfinite(X).all(axis=1)))
            raise NumericalBlowupError(
                f"non-finite state in path {bad} before step {start + nb}",
                step_index=start + nb, path_index=bad)
    # close the reduction at the final grid point (frozen paths sit at their
    # exit state, so this is a no-op for them)
    h_fin = cfg.M - np.einsum("ij,jk,ik->i", X, d.P, X)
    np.minimum(min_h, h_fin, out=min_h)
    newly = (h_fin <= 0.0) & (exit_idx < 0)
    exit_idx[newly] = n_steps
    return min_h, exit_idx


def simulate_linear_final(Abar, G, x0, T: float, dt: float, seed: int,
                          n_paths: int, backend: str | None = None,
                          block_steps: int = DEFAULT_BLOCK_STEPS) -> np.ndarray:
    """Final states of n_paths runs of dx = Abar x dt + G dw from x0."""
    n_steps = _grid(T, dt)
    kern = get_backend(backend)
    Abar = np.ascontiguousarray(Abar, dtype=float)
    G = np.ascontiguousarray(G, dtype=float).reshape(3)
    sdt = np.sqrt(dt)
    X = np.tile(np.asarray(x0, dtype=float), (n_paths, 1))
    for start in range(0, n_steps, block_steps):
        nb = min(block_steps, n_steps - start)
        dW = np.empty((n_paths, nb))
        for j in range(n_paths):
            dW[j] = sdt * unit_normals(RngStream(seed, j), start, nb)
        kern.run_linear_block(X, dW, dt, Abar, G)
    if not np.isfinite(X).all():
        raise NumericalBlowupError("non-finite state in linear ensemble",
                                   step_index=n_steps)
    return X
