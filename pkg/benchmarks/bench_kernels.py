"""Compare the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Prints the best-of-N wall time per kernel for both backends, the speedup,
and the maximum relative difference between their outputs.
"""
import argparse
import timeit

import numpy as np

from renormalens import _kernels_py

try:
    from renormalens import _kernels as _compiled
except ImportError:
    _compiled = None


def cases(rng):
    p = np.sort(rng.uniform(1e-3, 1.0, 400))
    x_in = np.linspace(-10, 10, 601)
    x_out = np.linspace(-18, 18, 1081)
    xi = rng.standard_normal(10**6)
    w = xi**4 - 3.0
    return {
        "log_divided_difference (400)": (lambda m: m.log_divided_difference(p, 1e-12)),
        "logarithmic_mean (400)": (lambda m: m.logarithmic_mean(p, 1e-12)),
        "gaussian_kernel (1081x601)": (lambda m: m.gaussian_kernel(x_out, x_in, 1.0, 4.0, x_out[1] - x_out[0])),
        "hermite_product_sums (1e6, deg 6)": (lambda m: m.hermite_product_sums(xi, w, 6)),
    }


def max_rel_diff(a, b):
    a = np.asarray(a) if not isinstance(a, tuple) else np.concatenate([np.ravel(v) for v in a])
    b = np.asarray(b) if not isinstance(b, tuple) else np.concatenate([np.ravel(v) for v in b])
    scale = np.maximum(np.abs(b), np.abs(b).max() * 1e-12)
    return float(np.max(np.abs(a - b) / scale))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _compiled is None:
        print("compiled extension not built; reinstall with Cython available")
        return
    rng = np.random.default_rng(0)
    print("%-36s %12s %12s %9s %10s" % ("kernel", "python [ms]", "cython [ms]", "speedup", "max rel"))
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat))
        diff = max_rel_diff(fn(_compiled), fn(_kernels_py))
        print("%-36s %12.3f %12.3f %8.2fx %10.2e" % (name, 1e3 * t_py, 1e3 * t_cy, t_py / t_cy, diff))


if __name__ == "__main__":
    main()
