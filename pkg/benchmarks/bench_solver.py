#!/usr/bin/env python3
"""Benchmark the compiled solver kernel against the pure-NumPy fallback.

Times full LASSO solves on row-orthogonal instances at three sizes and
checks that both backends return the same solution to solver tolerance.

    python3 benchmarks/bench_solver.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from crod.lasso import SolverOptions, solve_lasso, solver_backend
from crod.signal_model import make_instance, snr_to_noise_variance

SIZES = [(128, 256), (384, 512), (768, 1024)]


def bench(repeats):
    if solver_backend() != "compiled":
        print("compiled backend unavailable; nothing to compare")
        return
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(1, "blas")
        print("BLAS capped at 1 thread (matches the harness worker setup)")
    except ImportError:
        print("threadpoolctl not installed; BLAS threading left at default")
    print(f"{'size':>12} {'backend':>9} {'solve ms':>10} {'iters':>6}   agreement")
    for M, N in SIZES:
        sigma2 = snr_to_noise_variance(10.0, M / N, 1.0)
        inst = make_instance("partial-fourier", M, N, 0.1, 1.0, sigma2, seed=123)
        sols = {}
        times = {}
        for backend in ("compiled", "python"):
            opts = SolverOptions(step=1.0, backend=backend)
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                sols[backend] = solve_lasso(inst.y, inst.A, 0.1, opts)
                best = min(best, time.perf_counter() - t0)
            times[backend] = best
        gap = np.abs(sols["compiled"].x_hat - sols["python"].x_hat).max()
        for backend in ("compiled", "python"):
            sol = sols[backend]
            tag = f"max|dx|={gap:.1e}" if backend == "compiled" else ""
            print(f"{M}x{N:>5} {backend:>9} {times[backend] * 1e3:>10.2f} "
                  f"{sol.iterations:>6d}   {tag}")
        speedup = times["python"] / times["compiled"]
        print(f"{'':>12} {'speedup':>9} {speedup:>10.2f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    bench(parser.parse_args().repeats)
