"""Time the numba kernels against their numpy twins on the same inputs.

    python benchmarks/bench_kernels.py [--n 6] [--repeat 3]

The first numba call includes compilation (or a cache load) and is reported
separately.  Results from both backends are compared before timing.
"""
import argparse
import math
import time

import numpy as np

from favard_lab import kernels
from favard_lab.cantor import build_generation
from favard_lab.pairs import _special_centers, kmax_for
from favard_lab.noodle import make_noodle


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(n):
    ks = build_generation(n)
    cx, cy = np.ascontiguousarray(ks.cx), np.ascontiguousarray(ks.cy)
    g = make_noodle("circle", r=10.0)
    thetas = (np.arange(256) + 0.5) * (math.pi / 256)
    xs, ys = _special_centers(ks)
    small = build_generation(min(n, 5))
    sx, sy = _special_centers(small)
    return {
        "angle_stats (256 angles)": lambda m: m.angle_stats(
            cx, cy, ks.half, thetas, g.code, g.kernel_params, -math.inf, math.inf, 0.0),
        "annulus_hit_count (2e4 samples)": lambda m: m.annulus_hit_count(
            7, 20_000, 10.0, n, 0.5, 0.5, 10.0 - math.sqrt(2), 10.0 + math.sqrt(2)),
        f"pair_table_exact (n={min(n, 5)})": lambda m: m.pair_table_exact(
            sx, sy, small.n, kmax_for(small.n)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    mods = kernels.backends()
    if "numba" not in mods:
        print("numba unavailable; only the numpy backend can run")
    print(f"{'kernel':34s} {'numpy s':>10s} {'numba s':>10s} {'first s':>10s} {'speedup':>8s}")
    for name, call in cases(args.n).items():
        ref = call(mods["numpy"])
        t_np = best_of(lambda: call(mods["numpy"]), args.repeat)
        if "numba" in mods:
            t0 = time.perf_counter()
            got = call(mods["numba"])
            first = time.perf_counter() - t0
            for a, b in zip(np.atleast_1d(ref) if np.isscalar(ref) else ref,
                            np.atleast_1d(got) if np.isscalar(got) else got):
                assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name
            t_nb = best_of(lambda: call(mods["numba"]), args.repeat)
            print(f"{name:34s} {t_np:10.4f} {t_nb:10.4f} {first:10.4f} {t_np / t_nb:8.1f}")
        else:
            print(f"{name:34s} {t_np:10.4f} {'-':>10s} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
