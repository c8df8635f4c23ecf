"""Command line front end: certify, simulate, mc.

All commands take a scenario, either from a JSON file (--scenario) or a
shipped preset (--preset), with optional overrides for seed, path count,
horizon, step, and controller mode.  Outputs are machine-readable: JSON
documents for certificates and ensemble reports, CSV files for
trajectories.

Exit codes: 0 success, 2 validation or infeasibility, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import linalg
from .backend import default_backend_name
from .control import MODES
from .engine import NumericalBlowupError, simulate_path
from .montecarlo import McConfig, compare_modes, estimate_safety
from .rng import RngStream
from .safety import InfeasibleError
from .scenario import PRESETS, Scenario, ScenarioError, load_scenario, preset_scenario
from .vessel import VesselParams

__all__ = ["main"]

_FLOAT_FMT = "%.17g"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vesselsafe",
        description="safety-certified vessel tracking: certificates, "
                    "trajectory simulation, and Monte-Carlo safety estimation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("certify", "compute the safety certificate for a scenario"),
            ("simulate", "simulate sample paths and export CSV trajectories"),
            ("mc", "estimate empirical safety probabilities per mode")):
        cmd = sub.add_parser(name, help=help_text)
        src = cmd.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", type=Path, help="scenario JSON file")
        src.add_argument("--preset", choices=sorted(PRESETS),
                         help="shipped scenario preset")
        cmd.add_argument("--out", type=Path, default=None,
                         help="output directory (required for simulate)")
        cmd.add_argument("--seed", type=int, default=None, help="override RNG seed")
        cmd.add_argument("--paths", type=int, default=None, help="override path count")
        cmd.add_argument("--horizon", type=float, default=None,
                         help="override horizon T in seconds")
        cmd.add_argument("--dt", type=float, default=None, help="override time step")
        cmd.add_argument("--mode", choices=MODES, default=None,
                         help="override controller mode")
    return parser


def _load(args) -> Scenario:
    sc = load_scenario(args.scenario) if args.scenario else preset_scenario(args.preset)
    sim = sc.sim
    if args.seed is not None:
        sim = replace(sim, seed=args.seed)
    if args.paths is not None:
        sim = replace(sim, n_paths=args.paths)
    if args.horizon is not None:
        sim = replace(sim, T=args.horizon)
    if args.dt is not None:
        sim = replace(sim, dt=args.dt)
    if args.mode is not None:
        sim = replace(sim, mode=args.mode)
    if not (sim.T > 0.0 and 0.0 < sim.dt <= sim.T):
        raise ScenarioError("overrides must keep 0 < dt <= T")
    if sim.n_paths < 1:
        raise ScenarioError("overrides must keep n_paths >= 1")
    return Scenario(vessel=sc.vessel, Q_prime=sc.Q_prime, R=sc.R, comp=sc.comp,
                    x0=sc.x0, sim=sim)


def _mat(a: np.ndarray) -> list:
    return np.asarray(a, dtype=float).tolist()


def _dump_json(doc: dict, out_dir: Path | None, filename: str) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(text + "\n", encoding="utf-8")
    return text


def cmd_certify(args) -> int:
    sc = _load(args)
    design = sc.design()
    cert = sc.certificate(design)
    doc = cert.to_dict()
    doc["matrices"] = {
        "A": _mat(design.A), "B": _mat(design.B),
        "Q_prime": _mat(design.Q_prime), "R": _mat(design.R),
        "R_prime": _mat(sc.comp.R_prime), "G": _mat(sc.vessel.G),
        "P": _mat(design.P), "K": _mat(design.K),
        "Abar": _mat(design.Abar), "Q_eff": _mat(design.Q_eff),
    }
    doc["x0"] = _mat(sc.x0)
    print(_dump_json(doc, args.out, "certificate.json"))
    if not cert.feasible:
        print(f"infeasible: M - mu > {cert.required_gap:.2f} required "
              f"(scenario has {sc.comp.M - sc.comp.mu:.2f})", file=sys.stderr)
        return 2
    return 0


def _write_path_csv(path: Path, sample) -> None:
    header = ("t,x_e,y_e,theta_e,h,v_cmd,omega_cmd,"
              "v_compensator,omega_compensator")
    cols = np.column_stack([
        sample.times, sample.states, sample.h_values,
        sample.inputs, sample.compensator,
    ])
    np.savetxt(path, cols, fmt=_FLOAT_FMT, delimiter=",",
               header=header, comments="")


def _write_boundary_csv(path: Path, P: np.ndarray, M: float, mu: float,
                        n_points: int = 512) -> None:
    P2 = P[:2, :2]
    angles = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    quad = np.einsum("ij,jk,ik->i", d, P2, d)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# level sets of x'Px on the theta_e = 0 slice; "
                 "h0: x'Px = M (safe-set boundary), "
                 "hmu: x'Px = M - mu (admissible-start boundary)\n")
        fh.write("boundary,x_e,y_e\n")
        for label, level in (("h0", M), ("hmu", M - mu)):
            radii = np.sqrt(level / quad)
            for r, (cx, cy) in zip(radii, d):
                fh.write(f"{label},{_FLOAT_FMT % (r * cx)},{_FLOAT_FMT % (r * cy)}\n")


def cmd_simulate(args) -> int:
    if args.out is None:
        raise ScenarioError("simulate requires --out <dir>")
    sc = _load(args)
    design = sc.design()
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for sid in range(sc.sim.n_paths):
        sample = simulate_path(sc.x0, sc.sim.mode, design, sc.comp, sc.vessel,
                               sc.sim.T, sc.sim.dt, RngStream(sc.sim.seed, sid),
                               stop_on_exit=sc.sim.stop_on_exit)
        fname = out / f"path_{sid}.csv"
        _write_path_csv(fname, sample)
        written.append(fname.name)
    quiet = VesselParams(c=sc.vessel.c, v_r=sc.vessel.v_r,
                         omega_r=sc.vessel.omega_r, G=np.zeros(3))
    det = simulate_path(sc.x0, sc.sim.mode, design, sc.comp, quiet,
                        sc.sim.T, sc.sim.dt, RngStream(sc.sim.seed, 0),
                        stop_on_exit=sc.sim.stop_on_exit)
    _write_path_csv(out / "path_det.csv", det)
    written.append("path_det.csv")
    _write_boundary_csv(out / "boundary.csv", design.P, sc.comp.M, sc.comp.mu)
    written.append("boundary.csv")
    print(f"wrote {len(written)} files to {out} "
          f"(mode {sc.sim.mode}, backend {default_backend_name()})")
    return 0


def cmd_mc(args) -> int:
    sc = _load(args)
    design = sc.design()
    cert = sc.certificate(design)
    # estimation always stops paths at their first exit: a path is unsafe
    # the moment h <= 0, and integrating past it can drive the nonlinear
    # compensator through its near-singular set for no informational gain
    # (scenario stop_on_exit still governs `simulate` trajectory exports)
    base = McConfig(mode=sc.sim.mode, x0=sc.x0, T=sc.sim.T, dt=sc.sim.dt,
                    n_paths=sc.sim.n_paths, seed=sc.sim.seed,
                    stop_on_exit=True)
    if args.mode is not None:
        bounds = {"tra": cert.prob_tra, "tra+com": cert.prob_com,
                  "tra+nlc": cert.prob_nlc}
        reports = {args.mode: estimate_safety(base, design, sc.comp, sc.vessel,
                                              theoretical_lb=bounds[args.mode])}
    else:
        reports = compare_modes(base, design, sc.comp, sc.vessel, cert)

    rows = []
    for mode, rep in reports.items():
        safe_name = "mc_" + mode.replace("+", "_") + ".json"
        _dump_json(rep.to_dict(), args.out, safe_name)
        rows.append((mode, rep))
    comparison = {
        "T": base.T, "dt": base.dt, "n_paths": base.n_paths, "seed": base.seed,
        "modes": {m: {"safe_fraction": r.safe_fraction,
                      "wilson_lo": r.wilson_lo, "wilson_hi": r.wilson_hi,
                      "theoretical_lb": r.theoretical_lb,
                      "lb_consistent": r.lb_consistent} for m, r in rows},
    }
    _dump_json(comparison, args.out, "comparison.json")

    print(f"{'mode':<9} {'safe':>9} {'fraction':>9} {'wilson95':>17} "
          f"{'certified_lb':>13}")
    for mode, rep in rows:
        lb = "-" if rep.theoretical_lb is None else f"{rep.theoretical_lb:.4f}"
        print(f"{mode:<9} {rep.n_safe:>4}/{rep.n_paths:<4} "
              f"{rep.safe_fraction:>9.4f} "
              f"[{rep.wilson_lo:.4f}, {rep.wilson_hi:.4f}] {lb:>13}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "certify":
            return cmd_certify(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_mc(args)
    except (ScenarioError, InfeasibleError, linalg.InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalBlowupError, linalg.SolverFailureError,
            linalg.NoSolutionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
