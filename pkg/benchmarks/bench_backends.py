#!/usr/bin/env python3
"""Benchmark the numba kernel build against the plain numpy/python build.

The workload is the hot path of the package: adaptive integration of
reduced-ODE instances over figure-scale spans (single trajectories and a
portrait-style seed grid).  Run:

    python3 benchmarks/bench_backends.py [--repeat N]

The active default backend elsewhere follows SYMLAB_BACKEND; here both
builds are timed explicitly.
"""

import argparse
import time

import numpy as np

from symlab.odesolve import integrate

CASES = {
    "travel {1,1,1} span 100": dict(
        ode=(0.75, -2.0, 1.0, 0.0, -1.0), r0=1.0, rp0=0.0, span=(0.0, 100.0)),
    "scaling {1,1,0.5} span 50": dict(
        ode=(0.75, -1.0, 1.0, 0.25, -1.0), r0=1.0, rp0=0.0, span=(0.0, 50.0)),
    "stiff-ish {2,0,3} span 100": dict(
        ode=(0.75, -6.0, 0.0, 0.0, -4.0), r0=1.0, rp0=0.0, span=(0.0, 100.0)),
}


def run_case(backend: str, case: dict) -> float:
    t0 = time.perf_counter()
    traj = integrate(case["ode"], case["r0"], case["rp0"], case["span"],
                     rel_tol=1e-10, abs_tol=1e-12, backend=backend)
    dt = time.perf_counter() - t0
    assert traj.status == "completed"
    return dt


def run_grid(backend: str) -> float:
    seeds = [(r, 0.0) for r in np.linspace(1.2, 2.4, 12)]
    t0 = time.perf_counter()
    for r0, rp0 in seeds:
        integrate((0.75, -2.0, 1.0, 0.0, -1.0), r0, rp0, (0.0, 60.0),
                  rel_tol=1e-10, abs_tol=1e-12, backend=backend)
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    # compile outside the timings
    t0 = time.perf_counter()
    integrate((0.0, 0.0, 1.0, 0.0, 0.0), 1.0, 0.0, (0.0, 0.5), backend="numba")
    print(f"numba compile+first-call: {time.perf_counter() - t0:.2f}s "
          "(cached across runs)\n")

    header = f"{'case':<32}{'numpy':>12}{'numba':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, case in CASES.items():
        t_py = min(run_case("numpy", case) for _ in range(args.repeat))
        t_nb = min(run_case("numba", case) for _ in range(args.repeat))
        print(f"{name:<32}{t_py * 1e3:>10.1f}ms{t_nb * 1e3:>10.1f}ms"
              f"{t_py / t_nb:>9.1f}x")
    t_py = min(run_grid("numpy") for _ in range(args.repeat))
    t_nb = min(run_grid("numba") for _ in range(args.repeat))
    print(f"{'portrait grid (12 seeds)':<32}{t_py * 1e3:>10.1f}ms"
          f"{t_nb * 1e3:>10.1f}ms{t_py / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
