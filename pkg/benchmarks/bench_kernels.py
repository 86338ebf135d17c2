"""Compare the JIT and numpy kernel backends on identical inputs.

Run: python3 benchmarks/bench_kernels.py [--sizes 100000,1000000,5000000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from iotdq._kernels import IMPLS


def _sample(size: int, rng: np.random.Generator) -> np.ndarray:
    iats = 60.0 * (1.0 + rng.uniform(-0.1, 0.1, size=size))
    outliers = rng.choice(size, size=max(1, size // 100), replace=False)
    iats[outliers] *= 10.0
    return iats


def _time(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100000,1000000,5000000")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = sorted(IMPLS)
    if "numba" not in IMPLS:
        print("numba backend unavailable (DQ_NO_NUMBA set or numba missing)")
    rng = np.random.default_rng(0)

    header = f"{'kernel':<16}{'size':>10}" + "".join(
        f"{b + ' (s)':>14}" for b in backends
    )
    print(header)
    print("-" * len(header))
    for size in sizes:
        iats = _sample(size, rng)
        sorted_iats = np.sort(np.rint(iats))
        cases = {
            "m1_sums": (iats, 60.0, 0.5),
            "mod_z": (iats, 60.0, 4.0, 0.6745),
            "mode_of_sorted": (sorted_iats,),
        }
        for kernel, call_args in cases.items():
            row = f"{kernel:<16}{size:>10}"
            for backend in backends:
                fn = IMPLS[backend][kernel]
                fn(*call_args)  # warm JIT / cache
                row += f"{_time(fn, *call_args):>14.6f}"
            print(row)


if __name__ == "__main__":
    main()
