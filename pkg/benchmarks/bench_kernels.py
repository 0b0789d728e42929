"""Timing comparison of the compiled interpolation kernels vs the numpy
fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--sizes 32,64] [--points 200000]

Both implementations are imported directly so a single process can time
the two back ends side by side (the package-level selection via
SDNSE_NO_EXT works per process; here we bypass it on purpose).
"""

import argparse
import time

import numpy as np

from sdnse.kernels import _reference

try:
    from sdnse.kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(N, npts, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((3, N, N, N))
    points = rng.uniform(-3.0, 3.0, (npts, 3))
    L = 2.0 * np.pi
    origin = np.full(3, -L / 2)
    spacing = np.full(3, L / N)

    rows = []
    for name, args in (
            ("interp_linear", (values, origin, spacing, points)),
            ("interp_linear_periodic", (values, L, points))):
        ref = _time(getattr(_reference, name), *args)
        if _core is not None:
            fast = _time(getattr(_core, name), *args)
            out_a = getattr(_reference, name)(*args)
            out_b = getattr(_core, name)(*args)
            err = float(np.max(np.abs(out_a - out_b)))
            rows.append((name, N, npts, ref, fast, ref / fast, err))
        else:
            rows.append((name, N, npts, ref, None, None, None))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="32,64",
                    help="comma-separated grid sizes")
    ap.add_argument("--points", type=int, default=200000)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _core is None:
        print("compiled extension not available; timing fallback only")
    hdr = (f"{'kernel':<24} {'N':>4} {'points':>8} {'numpy (s)':>10} "
           f"{'compiled (s)':>13} {'speedup':>8} {'max |diff|':>11}")
    print(hdr)
    print("-" * len(hdr))
    for N in sizes:
        for name, n, npts, ref, fast, speed, err in bench(N, args.points):
            if fast is None:
                print(f"{name:<24} {n:>4} {npts:>8} {ref:>10.4f} "
                      f"{'-':>13} {'-':>8} {'-':>11}")
            else:
                print(f"{name:<24} {n:>4} {npts:>8} {ref:>10.4f} "
                      f"{fast:>13.4f} {speed:>8.2f} {err:>11.2e}")


if __name__ == "__main__":
    main()
