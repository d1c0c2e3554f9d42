"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""

import argparse
import time

import numpy as np

from prony_lowrank import kernels
from prony_lowrank.hankel import build_hankel
from prony_lowrank.search import SearchConfig, min_moment_distance
from prony_lowrank.signal import random_regular_signal


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    out = []
    for d in (2, 3, 4):
        k = d - 1
        n = 2 * d - 1
        target = rng.normal(size=n)
        mask = np.ones(n, dtype=np.uint8)
        z0 = np.concatenate([rng.uniform(-1, 1, k), rng.uniform(-1, 1, k)])
        lo = np.concatenate([np.full(k, -10.0), np.full(k, -3.0)])
        step = 0.1 * np.maximum(np.abs(z0), 0.1)
        nm_args = (target, mask, z0, step, lo, -lo, 4000, 1e-14, 1e-10)
        out.append((f"nelder_mead d={d}", "nelder_mead", nm_args))
    for d in (4, 6, 8):
        H = build_hankel(rng.normal(size=2 * d - 1), d)
        out.append((f"max_abs_minor d={d} l={d // 2}", "max_abs_minor", (H, d // 2)))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; only the pure-Python backend is available")
        return 1

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn_name, fargs in cases(rng):
        tp = best_of(lambda: getattr(py, fn_name)(*fargs), args.repeat)
        tc = best_of(lambda: getattr(cy, fn_name)(*fargs), args.repeat)
        print(f"{name:32s} {tp * 1e3:12.3f} {tc * 1e3:12.3f} {tp / tc:8.1f}")

    F = random_regular_signal(rng, 4, 1 / 3, 0.5)
    for backend in ("python", "cython"):
        cfg = SearchConfig(3, restarts=20, backend=backend)
        t = best_of(lambda: min_moment_distance(F, cfg), 1)
        res = min_moment_distance(F, cfg)
        print(f"full search d=4 l=4 ({backend}): {t:.3f}s distance={res.distance:.17g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
