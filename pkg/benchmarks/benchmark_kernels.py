"""Compare the numba recursion kernel against the pure-numpy fallback.

Run:  python3 benchmarks/benchmark_kernels.py [reps] [n]

The numba path is selected automatically on import; set MDGARCH_NO_NUMBA=1
to force the numpy fallback package-wide.
"""

import sys
import time

import numpy as np

from mdgarch.innovations import RngStream
from mdgarch.kernels import USE_NUMBA, _recursion_batch_py, recursion_batch


def bench(fn, eps, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(eps, 1.0, 0.0141, 0.9919, 1.0)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    reps = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 5000
    eps = RngStream(0, 0).generator().standard_normal((reps, n + 1))

    t_py, out_py = bench(_recursion_batch_py, eps)
    print(f"numpy fallback : {t_py * 1e3:8.1f} ms  ({reps} reps x {n} steps)")

    if not USE_NUMBA:
        print("numba unavailable or disabled (MDGARCH_NO_NUMBA); "
              "only the fallback was timed")
        return

    recursion_batch(eps[:2], 1.0, 0.0141, 0.9919, 1.0)  # JIT warmup
    t_nb, out_nb = bench(recursion_batch, eps)
    print(f"numba kernel   : {t_nb * 1e3:8.1f} ms  (speedup {t_py / t_nb:.1f}x)")

    same_lin = np.array_equal(out_py[0], out_nb[0])
    same_ov = np.array_equal(out_py[2], out_nb[2])
    log_gap = float(np.max(np.abs(out_py[1] - out_nb[1])))
    print(f"linear track identical: {same_lin}; overflow flags identical: "
          f"{same_ov}; max log-track gap: {log_gap:.2e}")


if __name__ == "__main__":
    main()
