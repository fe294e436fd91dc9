"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from synthopt import kernels
from synthopt.tsp import TspInstance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases(rng):
    for n in (10, 12, 14):
        d = TspInstance.from_points(rng.random((n, 2))).masked_matrix()
        yield f"held_karp n={n}", "held_karp", (d,)
    for n in (16, 20, 24):
        w = rng.integers(1, 10**9, n).tolist()
        yield f"partition_enumerate n={n}", "partition_enumerate", (w,)
    for n in (24, 32):
        w = rng.integers(1, 10**9, n).tolist()
        yield f"partition_mitm n={n}", "partition_mitm", (w,)
    for n in (50, 100):
        d = TspInstance.from_points(rng.random((n, 2))).masked_matrix()
        yield f"two_opt n={n}", "two_opt", (d, list(range(n)))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28} {'python [s]':>12} {'cython [s]':>12} {'speedup':>9}  same")
    for label, name, fargs in cases(rng):
        t_py, out_py = best_of(lambda: getattr(kernels.python_backend, name)(*fargs), args.repeat)
        t_c, out_c = best_of(lambda: getattr(kernels.compiled_backend, name)(*fargs), args.repeat)
        print(f"{label:<28} {t_py:>12.4f} {t_c:>12.4f} {t_py / t_c:>8.1f}x  {out_py == out_c}")


if __name__ == "__main__":
    main()
