"""Scenario files: one JSON document describing a full experiment.

A scenario bundles the vessel parameters, LQ weights, compensator
configuration, initial state, and simulation settings.  Matrices are nested
row-major lists.  Unknown keys are rejected so typos fail loudly, and every
module-level invariant is revalidated on load.

The shipped ``paper-sec7`` preset is the single source of the reference
scenario constants used by the demo and the acceptance suite: pivot c = 3,
reference inputs (v_r, omega_r) = (1, 0.1), weights Q' = diag(0.1, 0.3,
0.2), R = 40 I, compensator R' = 15 I, levels (M, mu, M') = (10, 1, 9),
design rate b' = 3, noise G = 0.08 (1, 1, 1), start x0 = (0.5, 0.5, 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .control import MODES, CompensatorConfig, LqrDesign, design_lqr
from .safety import SafetyCertificate, Zcbf, build_certificate
from .vessel import VesselParams, linearize

__all__ = ["ScenarioError", "SimSettings", "Scenario", "PRESETS",
           "scenario_from_dict", "load_scenario", "preset_scenario"]

DEFAULT_SIM = {"T": 100.0, "dt": 1e-3, "n_paths": 10, "seed": 1234,
               "mode": "tra+nlc", "stop_on_exit": True}


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


@dataclass(frozen=True)
class SimSettings:
    T: float
    dt: float
    n_paths: int
    seed: int
    mode: str
    stop_on_exit: bool


@dataclass(frozen=True)
class Scenario:
    vessel: VesselParams
    Q_prime: np.ndarray
    R: np.ndarray
    comp: CompensatorConfig
    x0: np.ndarray
    sim: SimSettings

    def design(self) -> LqrDesign:
        A, B = linearize(self.vessel)
        return design_lqr(A, B, self.Q_prime, self.R)

    def zcbf(self, design: LqrDesign | None = None) -> Zcbf:
        d = design if design is not None else self.design()
        return Zcbf(P=d.P, M=self.comp.M)

    def certificate(self, design: LqrDesign | None = None) -> SafetyCertificate:
        d = design if design is not None else self.design()
        return build_certificate(d, self.comp, self.vessel, x0=self.x0)


PRESETS: dict[str, dict] = {
    "paper-sec7": {
        "vessel": {"c": 3.0, "v_r": 1.0, "omega_r": 0.1, "G": [0.08, 0.08, 0.08]},
        "lq": {
            "Q_prime": [[0.1, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.0, 0.2]],
            "R": [[40.0, 0.0], [0.0, 40.0]],
        },
        "compensator": {
            "R_prime": [[15.0, 0.0], [0.0, 15.0]],
            "b_prime": 3.0, "M": 10.0, "mu": 1.0, "M_prime": 9.0,
            "eps_den": 1e-10,
        },
        "x0": [0.5, 0.5, 0.0],
        "simulation": {"T": 100.0, "dt": 1e-3, "n_paths": 10, "seed": 1234,
                       "mode": "tra+nlc", "stop_on_exit": True},
    },
}


def _require_keys(d: dict, allowed: set[str], where: str, required: set[str] = frozenset()):
    unknown = set(d) - allowed
    if unknown:
        raise ScenarioError(f"unknown key(s) {sorted(unknown)} in {where}; "
                            f"allowed: {sorted(allowed)}")
    missing = required - set(d)
    if missing:
        raise ScenarioError(f"missing required key(s) {sorted(missing)} in {where}")


def _matrix(value, shape: tuple[int, int], where: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise ScenarioError(f"{where} must be a {shape[0]}x{shape[1]} nested list, "
                            f"got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ScenarioError(f"{where} has non-finite entries")
    return arr


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed scenario document; defaults fill the simulation block."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _require_keys(doc, {"vessel", "lq", "compensator", "x0", "simulation"},
                  "scenario", required={"vessel", "lq", "compensator", "x0"})

    v = doc["vessel"]
    _require_keys(v, {"c", "v_r", "omega_r", "G"}, "vessel",
                  required={"c", "v_r", "omega_r", "G"})
    try:
        vessel = VesselParams(c=float(v["c"]), v_r=float(v["v_r"]),
                              omega_r=float(v["omega_r"]),
                              G=np.asarray(v["G"], dtype=float))
    except ValueError as exc:
        raise ScenarioError(f"vessel: {exc}") from exc

    lq = doc["lq"]
    _require_keys(lq, {"Q_prime", "R"}, "lq", required={"Q_prime", "R"})
    Q_prime = _matrix(lq["Q_prime"], (3, 3), "lq.Q_prime")
    R = _matrix(lq["R"], (2, 2), "lq.R")

    comp_doc = doc["compensator"]
    _require_keys(comp_doc, {"R_prime", "b_prime", "M", "mu", "M_prime", "eps_den"},
                  "compensator", required={"R_prime", "b_prime", "M", "mu", "M_prime"})
    try:
        comp = CompensatorConfig(
            R_prime=_matrix(comp_doc["R_prime"], (2, 2), "compensator.R_prime"),
            b_prime=float(comp_doc["b_prime"]), M=float(comp_doc["M"]),
            mu=float(comp_doc["mu"]), M_prime=float(comp_doc["M_prime"]),
            eps_den=float(comp_doc.get("eps_den", 1e-10)))
    except ValueError as exc:
        raise ScenarioError(f"compensator: {exc}") from exc

    x0 = np.asarray(doc["x0"], dtype=float)
    if x0.shape != (3,) or not np.isfinite(x0).all():
        raise ScenarioError("x0 must be a finite 3-vector")

    sim_doc = dict(DEFAULT_SIM)
    sim_doc.update(doc.get("simulation", {}))
    _require_keys(sim_doc, set(DEFAULT_SIM), "simulation")
    if sim_doc["mode"] not in MODES:
        raise ScenarioError(f"simulation.mode must be one of {MODES}")
    sim = SimSettings(T=float(sim_doc["T"]), dt=float(sim_doc["dt"]),
                      n_paths=int(sim_doc["n_paths"]), seed=int(sim_doc["seed"]),
                      mode=str(sim_doc["mode"]),
                      stop_on_exit=bool(sim_doc["stop_on_exit"]))
    if not (sim.T > 0.0 and 0.0 < sim.dt <= sim.T):
        raise ScenarioError("simulation requires 0 < dt <= T")
    if sim.n_paths < 1:
        raise ScenarioError("simulation.n_paths must be >= 1")

    return Scenario(vessel=vessel, Q_prime=Q_prime, R=R, comp=comp, x0=x0, sim=sim)


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario parse error at {path}:{exc.lineno}:{exc.colno}: "
                            f"{exc.msg}") from None
    return scenario_from_dict(doc)


def preset_scenario(name: str) -> Scenario:
    """Instantiate one of the shipped presets."""
    try:
        doc = PRESETS[name]
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; available: "
                            f"{sorted(set(PRESETS))}") from None
    return scenario_from_dict(json.loads(json.dumps(doc)))
