"""Compare the compiled and pure-Python kernels on monodromy-sized workloads.

Usage::

    python3 benchmarks/bench_kernels.py [--steps 20000] [--repeat 5]

Prints the best-of-``repeat`` wall time per kernel and backend, the speed-up,
and the maximum difference between the two backends' results.
"""

import argparse
import sys
import timeit

import numpy as np

from saddlescar import kernels
from saddlescar.classical import _merged_schedule, _scheme


def workloads(steps):
    kw, dw = _merged_schedule(4, steps)
    kw = np.ascontiguousarray(kw, dtype=float)
    dw = np.ascontiguousarray(dw, dtype=float)
    dt = 2 * np.pi / steps
    inv_m = np.ones(1)
    hess = np.full((kw.size, 1, 1), -2.0)
    sk, sd = (np.ascontiguousarray(w, dtype=float) for w in _scheme(4))
    H2 = np.array([[2.0, 0.0], [0.0, -4.0]])
    return {
        "tangent_flow": lambda be: be.tangent_flow(hess, kw, dw, inv_m, dt),
        "kdk_linear": lambda be: be.kdk_linear(H2, np.array([1.0, 0.0]), np.array([0.0, 1e-3]),
                                               sk, sd, np.ones(2), dt, steps),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<14}{'python [s]':>12}{'cython [s]':>12}{'speed-up':>10}{'max diff':>11}")
    for name, fn in workloads(args.steps).items():
        t = {}
        out = {}
        for label, be in (("python", kernels.python_backend), ("cython", kernels.compiled_backend)):
            out[label] = fn(be)
            t[label] = min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat))
        a, b = out["python"], out["cython"]
        if isinstance(a, tuple):
            diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
        else:
            diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:<14}{t['python']:>12.4f}{t['cython']:>12.4f}{t['python'] / t['cython']:>9.1f}x{diff:>11.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
