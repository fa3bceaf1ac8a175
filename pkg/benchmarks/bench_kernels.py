#!/usr/bin/env python3
"""Compare the compiled kernels against the pure NumPy/Python fallback.

Times the three hot kernels on a long synthetic trace (default: 90 days
at 5-second sampling, ~1.56M samples) and prints per-kernel medians
plus speedups. Also cross-checks that both backends agree.

Usage: python benchmarks/bench_kernels.py [--samples N] [--repeat K]
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from peakpauser._kernels import pure  # noqa: E402

try:
    from peakpauser._kernels import _ckernels as compiled
except ImportError:
    compiled = None


def timeit(fn, repeat):
    best = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best.append(time.perf_counter() - t0)
    return statistics.median(best)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=90 * 17280,
                        help="trace length (default: 90 days at 5 s)")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    n = args.samples
    rng = np.random.default_rng(123)
    z = rng.standard_normal(n)
    paused = (rng.uniform(size=n) < 4 / 24).astype(np.uint8)
    power = pure.two_level_gauss(paused, z, 200.0, 60.0, 2.0)
    hours = int(n * 5.0 // 3600) + 1
    price_by_hour = rng.uniform(0.01, 0.09, hours)

    cases = {
        "ewma(alpha=0.1)": lambda impl: impl.ewma(power, 0.1),
        "two_level_gauss": lambda impl: impl.two_level_gauss(paused, z, 200.0, 60.0, 2.0),
        "integrate_hourly_prices": lambda impl: impl.integrate_hourly_prices(
            power, price_by_hour, 0.0, 5.0),
    }

    print(f"samples: {n:,}   repeats: {args.repeat}   "
          f"compiled available: {compiled is not None}")
    print(f"{'kernel':<26}{'pure':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_pure = timeit(lambda: call(pure), args.repeat)
        if compiled is None:
            print(f"{name:<26}{t_pure * 1e3:>10.1f}ms{'-':>12}{'-':>10}")
            continue
        t_comp = timeit(lambda: call(compiled), args.repeat)
        print(f"{name:<26}{t_pure * 1e3:>10.1f}ms{t_comp * 1e3:>10.1f}ms"
              f"{t_pure / t_comp:>9.1f}x")

    if compiled is not None:
        assert np.array_equal(pure.ewma(power, 0.1), compiled.ewma(power, 0.1))
        assert np.array_equal(pure.two_level_gauss(paused, z, 200.0, 60.0, 2.0),
                              compiled.two_level_gauss(paused, z, 200.0, 60.0, 2.0))
        e1, c1 = pure.integrate_hourly_prices(power, price_by_hour, 0.0, 5.0)
        e2, c2 = compiled.integrate_hourly_prices(power, price_by_hour, 0.0, 5.0)
        assert abs(e1 - e2) <= 1e-9 * abs(e1) and abs(c1 - c2) <= 1e-9 * abs(c1)
        print("cross-check: backends agree")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
