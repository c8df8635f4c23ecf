#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Runs the same seeded workloads through every available backend and prints
wall times plus the compiled speedup.  Workloads: a recorded single path,
an ensemble safety sweep per controller mode, and the linear-SDE ensemble.

Usage: python benchmarks/bench_backends.py [--paths N] [--horizon T]
"""

import argparse
import time

import numpy as np

from vesselsafe import McConfig, RngStream, available_backends, estimate_safety, preset_scenario
from vesselsafe.engine import simulate_linear_final, simulate_path


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    fn(*args, **kwargs)
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=40)
    ap.add_argument("--horizon", type=float, default=10.0)
    args = ap.parse_args()

    sc = preset_scenario("paper-sec7")
    design = sc.design()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; timing the numpy fallback only")

    workloads = []

    def record_path(backend):
        simulate_path(sc.x0, "tra+nlc", design, sc.comp, sc.vessel,
                      args.horizon, sc.sim.dt, RngStream(11, 0), backend=backend)

    workloads.append((f"single recorded path, T={args.horizon:g}", record_path))

    for mode in ("tra", "tra+com", "tra+nlc"):
        def ensemble(backend, mode=mode):
            cfg = McConfig(mode=mode, x0=sc.x0, T=args.horizon, dt=sc.sim.dt,
                           n_paths=args.paths, seed=11)
            estimate_safety(cfg, design, sc.comp, sc.vessel, backend=backend)

        workloads.append((f"{args.paths}-path ensemble, mode {mode}", ensemble))

    def linear(backend):
        simulate_linear_final(design.Abar, sc.vessel.G, np.zeros(3),
                              args.horizon, sc.sim.dt, 11, args.paths,
                              backend=backend)

    workloads.append((f"{args.paths}-path linear SDE ensemble", linear))

    width = max(len(name) for name, _ in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, fn in workloads:
        times = [timed(fn, b) for b in backends]
        row = f"{name:<{width}}  " + "".join(f"{t:>11.3f}s" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
