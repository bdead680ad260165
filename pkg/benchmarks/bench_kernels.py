"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat R]``. Each
kernel is called on identical inputs through both implementations; the
best-of-R wall time and the largest output difference are reported.
"""

import argparse
import timeit

import numpy as np

from jmatrix1d import _backend
from jmatrix1d.ratios import _seed_arrays
from jmatrix1d.reference_kinematics import BasisParams


def tql2_case(size):
    rng = np.random.default_rng(0)
    d = rng.standard_normal(size)
    e = rng.standard_normal(size - 1)
    return (d, e), lambda out: np.asarray(out[0])


def ratio_case(n_energies, stages):
    mus = np.linspace(0.3, 3.0, n_energies)
    init = _seed_arrays(BasisParams(1.0), mus)
    args = (np.ascontiguousarray(mus * mus), *init, stages)
    return args, lambda out: np.asarray(out[0])


def transfer_case(n_energies, cells):
    E = np.linspace(0.1, 6.0, n_energies)
    x = np.linspace(-1, 1, cells + 1)
    mids = 0.5 * (x[1:] + x[:-1])
    v = 5.0 * np.sin(np.pi * mids) ** 2
    return (E, v, np.diff(x)), np.asarray


CASES = {
    "tql2 (K=200)": ("tql2", lambda: tql2_case(200)),
    "ratio_stages (400 energies, n=100)": ("ratio_stages", lambda: ratio_case(400, 100)),
    "transfer_matrices (200 energies, 4000 cells)": ("transfer_matrices", lambda: transfer_case(200, 4000)),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = _backend.implementations()
    if "compiled" not in impls:
        print("compiled kernels are not built; only the fallback is available")
    print(f"{'kernel':48s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s} {'max diff':>10s}")
    for label, (fn_name, make) in CASES.items():
        call_args, key = make()
        times, outs = {}, {}
        for name, mod in impls.items():
            fn = getattr(mod, fn_name)
            outs[name] = key(fn(*call_args))
            times[name] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)) * 1e3
        if "compiled" in times:
            diff = np.max(np.abs(outs["compiled"] - outs["python"]))
            print(f"{label:48s} {times['python']:12.2f} {times['compiled']:14.2f} "
                  f"{times['python'] / times['compiled']:8.1f} {diff:10.1e}")
        else:
            print(f"{label:48s} {times['python']:12.2f} {'-':>14s}")


if __name__ == "__main__":
    main()
