"""Wall time of the hot kernels under the numba and numpy backends.

Run: python3 benchmarks/bench_kernels.py [--n 4000] [--repeat 3]
The first numba call includes JIT compilation and is reported separately.
"""

import argparse
import time

import numpy as np

from lqgnest import _accel, excursion, levy
from lqgnest.params import ModelParams


def _cases(n):
    p = ModelParams(6.0, 0.0)
    return {
        "jump_sum_moments": lambda be, s: levy.jump_sum_moments(p, 1.4, n=n, rng=np.random.default_rng(s), backend=be),
        "excursion_product": lambda be, s: excursion.excursion_product_functional(1.5, 1.0, 1.0, n=5 * n, seed=s,
                                                                                   backend=be),
    }


def _time(fn, repeat):
    ts = []
    for k in range(repeat):
        t = time.perf_counter()
        fn(k)
        ts.append(time.perf_counter() - t)
    return min(ts)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = ["numba", "numpy"] if _accel.USE_NUMBA else ["numpy"]
    print(f"{'kernel':<20} {'backend':<7} {'first (s)':>10} {'best (s)':>10}")
    for name, fn in _cases(args.n).items():
        best = {}
        for be in backends:
            t0 = time.perf_counter()
            fn(be, 100)
            first = time.perf_counter() - t0
            best[be] = _time(lambda s: fn(be, s), args.repeat)
            print(f"{name:<20} {be:<7} {first:>10.3f} {best[be]:>10.3f}")
        if "numba" in best:
            print(f"{'':<20} numba speedup x{best['numpy'] / best['numba']:.1f}")


if __name__ == "__main__":
    main()
