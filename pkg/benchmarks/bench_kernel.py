"""Compiled vs pure-Python RK4 kernel: throughput and agreement.

    python benchmarks/bench_kernel.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from seakit import _backend, _kernel_py

# PureSpring-LP, kd=500, 10 kg load displaced by 0.5 m
PARAMS = [1.0, 10.0, 1000.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 500.0, 0.0, 0.0, 0.0, 0.0, 10.0]
X0 = [0.0, 0.0, 0.5, 0.0, 0.0, 0.0]


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    def run(integrate):
        return lambda: integrate(PARAMS, X0, [0.0], [0.0], 1e-4, args.steps)

    t_py, (s_py, f_py, _, _) = best_of(run(_kernel_py.integrate), args.repeat)
    print(f"python   : {args.steps} steps in {t_py:.4f} s ({t_py / args.steps * 1e6:.3f} us/step)")
    if _backend.BACKEND != "compiled":
        print("compiled : not built (set up with pip install -e .)")
        return
    t_c, (s_c, f_c, _, _) = best_of(run(_backend.integrate), args.repeat)
    print(f"compiled : {args.steps} steps in {t_c:.4f} s ({t_c / args.steps * 1e6:.3f} us/step)")
    print(f"speedup  : {t_py / t_c:.1f}x")
    same = np.array_equal(s_py, s_c) and np.array_equal(f_py, f_c)
    diff = float(np.max(np.abs(s_py - s_c)))
    print(f"agreement: bit-identical={same}, max |state diff|={diff:.3g}")


if __name__ == "__main__":
    main()
