"""Compare the compiled and numpy backends of the per-sample reductions.

Usage: python3 benchmarks/bench_kernels.py [--n 5000] [--repeat 200]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from gevfit import _kernels_py
from gevfit.gev_core import sample

try:
    from gevfit import _kernels
except ImportError:  # extension not built
    _kernels = None


def bench(fn, args, repeat: int) -> float:
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def _flat(out) -> np.ndarray:
    parts = out if isinstance(out, tuple) else (out,)
    return np.concatenate([np.ravel(np.asarray(v, dtype=float)) for v in parts])


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--repeat", type=int, default=200)
    a = p.parse_args()
    theta = (0.2, 0.0, 1.0)
    x = np.ascontiguousarray(sample(theta, a.n, 0).values)
    args = (*theta, x)
    print(f"n = {a.n}, best of {a.repeat}")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}{'max rel diff':>14}")
    for name in ("loglik_sum", "loglik_score_sum", "score_moments"):
        t_py = bench(getattr(_kernels_py, name), args, a.repeat) * 1e3
        if _kernels is None:
            print(f"{name:<18}{t_py:12.4f}{'n/a':>13}")
            continue
        t_cy = bench(getattr(_kernels, name), args, a.repeat) * 1e3
        out_py = _flat(getattr(_kernels_py, name)(*args))
        out_cy = _flat(getattr(_kernels, name)(*args))
        rel = float(np.max(np.abs(out_py - out_cy) / np.maximum(np.abs(out_py), 1e-300)))
        print(f"{name:<18}{t_py:12.4f}{t_cy:13.4f}{t_py / t_cy:9.1f}{rel:14.2e}")


if __name__ == "__main__":
    main()
