"""Timing comparison of the numba-jitted kernels against the pure-numpy
fallback (select with ADM_NUMBA=0).

Run twice to see both paths:

    python3 benchmarks/bench_kernels.py
    ADM_NUMBA=0 python3 benchmarks/bench_kernels.py
"""

import argparse
import timeit

import numpy as np

from admles import accel, kernels


def bench(label, func, *args, repeat=5, number=3):
    func(*args)  # warm-up (jit compilation on the accelerated path)
    best = min(timeit.repeat(lambda: func(*args), repeat=repeat,
                             number=number)) / number
    print(f"{label:<28} {best * 1e3:9.3f} ms")
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=2_000_000,
                        help="elements per kernel call (default 2e6)")
    args = parser.parse_args()

    path = "numba" if accel.HAS_NUMBA else "numpy"
    print(f"kernel path: {path} (ADM_NUMBA="
          f"{'unset -> on' if accel.HAS_NUMBA else 'off'}), "
          f"size={args.size}")

    rng = np.random.default_rng(0)
    x = 10.0 ** rng.uniform(-6, 6, args.size)
    g = 1.0 / (1.0 + x)

    bench("ratio_power(x, 16)", kernels.ratio_power, x, 16.0)
    bench("compl_power(x, 8, 4)", kernels.compl_power, x, 8.0, 4.0)
    bench("y_minus_log1p(x)", kernels.y_minus_log1p, x)
    bench("exp_limit_terms(x, 64)", kernels.exp_limit_terms, x, 64.0)
    bench("deconv_from_g(g, 8)", kernels.deconv_from_g, g, 8)


if __name__ == "__main__":
    main()
