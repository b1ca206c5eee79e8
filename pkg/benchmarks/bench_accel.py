"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Run:
    python3 benchmarks/bench_accel.py
"""

import time

import numpy as np

from chstep import _accel
from chstep._accel import _fallback

try:
    from chstep._accel import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"active backend: {_accel.BACKEND}")
    rng = np.random.default_rng(0)

    phi = rng.standard_normal((256, 256))
    a = rng.standard_normal(256 * 256)
    b = a + rng.standard_normal(a.size) * 1e-6

    n = 2000
    steps = np.abs(rng.uniform(0.5, 1.5, n))
    taus = steps[1:]
    rs = steps[1:] / steps[:-1]

    cases = [
        ("cube (256x256)", (phi,), "cube"),
        ("max_abs_diff (65536)", (a, b), "max_abs_diff"),
        (f"doc_theta_matrix (n={n})", (taus, rs), "doc_theta_matrix"),
    ]
    print(f"{'kernel':<28} {'numpy':>10} {'cython':>10} {'speedup':>8}")
    for label, args, name in cases:
        t_np = timeit(getattr(_fallback, name), *args)
        if _core is not None:
            t_cy = timeit(getattr(_core, name), *args)
            print(f"{label:<28} {t_np * 1e3:>8.3f}ms {t_cy * 1e3:>8.3f}ms "
                  f"{t_np / t_cy:>7.2f}x")
        else:
            print(f"{label:<28} {t_np * 1e3:>8.3f}ms {'n/a':>10} {'':>8}")


if __name__ == "__main__":
    main()
