"""Time the numba and numpy grid-certification kernels on the same inputs.

Usage: python benchmarks/bench_grid_kernels.py [--repeat 5]

Both back ends are run on identical integer level arrays taken from
generated markets; the script checks that their flags agree and prints the
median wall time per call.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from walras import _kernels
from walras.equilibrium import _scaled_levels
from walras.generate import generate_market
from walras._rational import q


def cases():
    for n, m, step, bound in ((4, 2, "1/4", 30), (5, 3, "1/2", 24), (6, 3, "1/4", 20)):
        market = generate_market(11, n, m, "mixed")
        s, top = q(step), q(bound)
        size = int(top // s) + 1
        grid = [s * k for k in range(size)]
        yield f"n={n} m={m} grid={size}^{m}", _scaled_levels(market, grid), size


def timed(fn, levels, size, repeat):
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(levels, size)
        samples.append(time.perf_counter() - start)
    return out, statistics.median(samples)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        print("numba is not installed; only the numpy kernel can run")
    print(f"{'case':28s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, levels, size in cases():
        ref, t_np = timed(_kernels.grid_flags_numpy, levels, size, args.repeat)
        if _kernels.HAS_NUMBA:
            _kernels.grid_flags_numba(levels, size)  # compile outside the timing
            got, t_nb = timed(_kernels.grid_flags_numba, levels, size, args.repeat)
            assert np.array_equal(ref, got), f"kernels disagree on {name}"
            print(f"{name:28s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:28s} {t_np * 1e3:9.2f}ms {'-':>10s}")


if __name__ == "__main__":
    main()
