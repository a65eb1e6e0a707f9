"""Compare the compiled and pure-Python Jacobi eigensolver backends.

Usage::

    python benchmarks/bench_jacobi.py [--sizes 4 8 16 32] [--repeat 20]

Prints the median wall time per Hermitian eigen-decomposition for each
backend and size, the speedup, and the largest eigenvalue discrepancy
against ``numpy.linalg.eigvalsh``.
"""

import argparse
import statistics
import time

import numpy as np

from ndhinf import numerics as nm


def random_hermitian(rng, n):
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (M + M.conj().T)


def time_backend(name, mats, repeat):
    nm.set_backend(name)
    times, err = [], 0.0
    for M in mats:
        ref = np.linalg.eigvalsh(M)
        for _ in range(repeat):
            t0 = time.perf_counter()
            w, _ = nm.herm_eig(M)
            times.append(time.perf_counter() - t0)
        err = max(err, float(np.max(np.abs(w - ref))))
    return statistics.median(times), err


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--matrices", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    backends = nm.available_backends()
    previous = nm.BACKEND
    rng = np.random.default_rng(args.seed)
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>4} " + " ".join(f"{b + ' [ms]':>15}" for b in backends)
          + f" {'speedup':>8} {'max |dw|':>10}")
    try:
        for n in args.sizes:
            mats = [random_hermitian(rng, n) for _ in range(args.matrices)]
            res = {b: time_backend(b, mats, args.repeat) for b in backends}
            speed = (res["python"][0] / res["compiled"][0]) if "compiled" in res else float("nan")
            err = max(e for _, e in res.values())
            print(f"{n:>4} " + " ".join(f"{res[b][0] * 1e3:>15.3f}" for b in backends)
                  + f" {speed:>8.1f} {err:>10.1e}")
    finally:
        nm.set_backend(previous)


if __name__ == "__main__":
    main()
