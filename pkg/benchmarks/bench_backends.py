"""Time the compiled and pure-Python loops on the figure2 problem.

    python3 benchmarks/bench_backends.py [--iterations N] [--repeat R]
"""

import argparse
import time

import numpy as np

from zospg import _backend
from zospg.geometry import Ball
from zospg.oracle import GaussianNoise, anisotropic_quadratic
from zospg.optimizer import RunConfig, run_zospg


def bench(backend: str, N: int, repeat: int) -> tuple[float, np.ndarray]:
    cfg = RunConfig(beta=3.0, gamma=0.5, sigma=0.01, holder_L=0.01, N=N, seed=0, record_every=max(1, N // 100))
    obj = anisotropic_quadratic()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        tr = run_zospg(cfg, obj, Ball(np.zeros(3), 1.0), GaussianNoise(0.01), np.array([0.5, 0.0, 0.0]),
                       backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, tr.errors


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iterations", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    results = {}
    for name in _backend.available():
        t, errs = bench(name, args.iterations, args.repeat)
        results[name] = errs
        print(f"{name:>7}: {t * 1e3:9.1f} ms  ({t / args.iterations * 1e9:7.1f} ns/iter)")
    if len(results) == 2:
        same = np.array_equal(results["cython"], results["python"])
        print(f"traces bitwise equal: {same}")


if __name__ == "__main__":
    main()
