"""Ensemble safety estimation with binomial confidence intervals.

A path counts as safe when its barrier minimum over the simulated horizon
stays positive.  This is a finite-horizon surrogate for the all-time event
the certificates bound: the estimated fraction is non-increasing in the
horizon, so a certified lower bound can only be compared against runs at a
stated T, and every report carries that horizon.  Wilson score intervals
are used throughout; they stay honest for proportions near one at the small
ensemble sizes typical here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .control import MODES, CompensatorConfig, LqrDesign
from .engine import ensemble_min_h
from .safety import SafetyCertificate
from .vessel import VesselParams

__all__ = ["McConfig", "McReport", "wilson_interval", "estimate_safety", "compare_modes"]

Z95 = 1.959963984540054


def wilson_interval(n_safe: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 <= n_safe <= n):
        raise ValueError("n_safe must lie in [0, n]")
    phat = n_safe / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    # the bound is exactly 0/1 at the boundary counts; avoid roundoff there
    lo = 0.0 if n_safe == 0 else max(0.0, center - half)
    hi = 1.0 if n_safe == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class McConfig:
    """One ensemble run: mode, initial state, grid, and seeding."""

    mode: str
    x0: np.ndarray
    T: float = 100.0
    dt: float = 1e-3
    n_paths: int = 200
    seed: int = 0
    stop_on_exit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(3))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not (self.T > 0.0 and 0.0 < self.dt <= self.T):
            raise ValueError("require 0 < dt <= T")


@dataclass(frozen=True)
class McReport:
    """Empirical safety of one ensemble, paired with its certified bound."""

    mode: str
    n_paths: int
    n_safe: int
    safe_fraction: float
    wilson_lo: float
    wilson_hi: float
    min_h_quantiles: dict
    theoretical_lb: float | None
    lb_consistent: bool | None
    T: float
    dt: float
    seed: int
    note: str = ("safe fraction is the finite-horizon surrogate "
                 "P(min h > 0 on [0, T]); exits are detected on the time "
                 "grid, which biases the fraction slightly upward")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "n_paths": self.n_paths, "n_safe": self.n_safe,
            "safe_fraction": self.safe_fraction,
            "wilson_lo": self.wilson_lo, "wilson_hi": self.wilson_hi,
            "min_h_quantiles": self.min_h_quantiles,
            "theoretical_lb": self.theoretical_lb,
            "lb_consistent": self.lb_consistent,
            "T": self.T, "dt": self.dt, "seed": self.seed, "note": self.note,
        }


def estimate_safety(cfg: McConfig, d: LqrDesign, comp: CompensatorConfig,
                    p: VesselParams, theoretical_lb: float | None = None,
                    backend: str | None = None) -> McReport:
    """Run the ensemble and summarize safety.

    Path j uses noise stream (seed, j), so reruns and any parallel or
    blocked execution produce identical reports.  Warns when the initial
    state is outside the admissible set {h > mu}, where the certified bound
    does not apply.
    """
    h0 = comp.M - float(cfg.x0 @ d.P @ cfg.x0)
    if h0 <= comp.mu:
        warnings.warn(f"x0 has h(x0) = {h0:.3f} <= mu = {comp.mu}; the "
                      f"certified bound assumes h(x0) > mu", stacklevel=2)
    min_h, _ = ensemble_min_h(cfg.x0, cfg.mode, d, comp, p, cfg.T, cfg.dt,
                              cfg.seed, cfg.n_paths,
                              stop_on_exit=cfg.stop_on_exit, backend=backend)
    n_safe = int(np.sum(min_h > 0.0))
    lo, hi = wilson_interval(n_safe, cfg.n_paths)
    qs = {f"q{q:02d}": float(np.percentile(min_h, q)) for q in (0, 25, 50, 75, 100)}
    return McReport(
        mode=cfg.mode, n_paths=cfg.n_paths, n_safe=n_safe,
        safe_fraction=n_safe / cfg.n_paths, wilson_lo=lo, wilson_hi=hi,
        min_h_quantiles=qs, theoretical_lb=theoretical_lb,
        lb_consistent=None if theoretical_lb is None else bool(theoretical_lb <= hi),
        T=cfg.T, dt=cfg.dt, seed=cfg.seed)


def compare_modes(base: McConfig, d: LqrDesign, comp: CompensatorConfig,
                  p: VesselParams, cert: SafetyCertificate,
                  backend: str | None = None) -> dict[str, McReport]:
    """Estimate all three modes under common random numbers.

    Every mode reuses the same (seed, path index) streams, so differences
    between modes are purely due to the controllers.
    """
    bounds = {"tra": cert.prob_tra, "tra+com": cert.prob_com, "tra+nlc": cert.prob_nlc}
    out = {}
    for mode in MODES:
        cfg = McConfig(mode=mode, x0=base.x0, T=base.T, dt=base.dt,
                       n_paths=base.n_paths, seed=base.seed,
                       stop_on_exit=base.stop_on_exit)
        out[mode] = estimate_safety(cfg, d, comp, p,
                                    theoretical_lb=bounds[mode], backend=backend)
    return out
