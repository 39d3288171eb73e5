"""Time the compiled log-1F1 kernel against the NumPy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--size N] [--repeat R]``
"""

import argparse
import time

import numpy as np

from akms_stats import _kernels_py, kernels


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    # arguments of the size met along the Laplace-type integrands
    x = np.sort(rng.uniform(0.0, 200.0, args.size))
    cases = [(2.8, 1.2), (4.4, 3.0), (10.0, 2.1)]
    print(f"backend in use: {kernels.BACKEND}; {args.size} points, best of {args.repeat}")
    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the fallback is timed")
    for a, b in cases:
        t_py = _best(lambda: _kernels_py.log_hyp1f1_pos(a, b, x, 1e-14, 10_000), args.repeat)
        line = f"a={a:<5g} b={b:<5g} numpy {t_py * 1e3:8.2f} ms"
        if kernels.BACKEND == "cython":
            t_cy = _best(lambda: kernels.log_hyp1f1_pos(a, b, x, 1e-14, 10_000), args.repeat)
            va = kernels.log_hyp1f1_pos(a, b, x, 1e-14, 10_000)[0]
            vb = _kernels_py.log_hyp1f1_pos(a, b, x, 1e-14, 10_000)[0]
            diff = float(np.max(np.abs(va - vb) / np.maximum(1.0, np.abs(vb))))
            line += f"  cython {t_cy * 1e3:8.2f} ms  speed-up {t_py / t_cy:6.1f}x  max rel diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
