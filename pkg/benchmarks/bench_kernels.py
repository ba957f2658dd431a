"""Timing comparison of the numba and pure-numpy kernel paths.

Run twice, once per backend:

    CQDEPH_NUMBA=0 python benchmarks/bench_kernels.py
    CQDEPH_NUMBA=1 python benchmarks/bench_kernels.py

The backend is chosen at import time, so one process measures one backend.
Two workloads: the adaptive ohmic quadrature swept over a time grid (the
cost center of trajectory evaluation) and the per-element multiplier matrix
for a large diagonal model.  JIT warmup is excluded from the timings.
"""

from __future__ import annotations

import time

import numpy as np

from cqdeph import kernels


def _best_of(fn, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_quadrature() -> None:
    t_grid = np.geomspace(0.05, 200.0, 160)

    def work():
        for zero_t, beta in ((True, float("inf")), (False, 2.0)):
            for t in t_grid:
                kernels.quad_ohmic("q2", 1.0, 0.1, 1.0, beta, zero_t,
                                   float(t), 1e-8)

    work()  # warmup compiles the jitted path
    dt = _best_of(work)
    print(f"quadrature sweep   {2 * t_grid.size:5d} integrals   "
          f"{dt * 1e3:9.2f} ms   ({dt / (2 * t_grid.size) * 1e6:7.1f} us each)")


def bench_multipliers() -> None:
    rng = np.random.default_rng(0)
    energies = rng.normal(size=2 * 24 * 24)  # a (23, 23) cutoff, dim 1152
    t_grid = np.linspace(0.1, 30.0, 40)

    def work():
        for t in t_grid:
            kernels.dephasing_multipliers(energies, float(t), 0.11, 0.08)

    work()
    dt = _best_of(work)
    n = energies.size
    print(f"multiplier matrix  {n}x{n} x {t_grid.size} times  "
          f"{dt * 1e3:9.2f} ms   "
          f"({dt / t_grid.size / n**2 * 1e9:7.2f} ns per element)")


def main() -> None:
    print(f"backend: {kernels.active_backend()} "
          f"(numba available: {kernels.HAS_NUMBA})")
    bench_quadrature()
    bench_multipliers()


if __name__ == "__main__":
    main()
