"""Compare the compiled and pure-Python propagation kernels.

Usage::

    python3 benchmarks/bench_propagate.py [--repeat N]

For each case the same fundamental system is propagated across [0, 1] with
both kernels; the script reports the best wall time of ``N`` runs, the step
count, the speed-up and the largest relative difference between the final
solution values after undoing the logarithmic rescaling.  Both kernels run
the same algorithm, so the difference reflects rounding only.
"""

import argparse
import time

import numpy as np

from slspec import _backend
from slspec.wkb import SLProblem

CASES = [
    ("free, z=1", SLProblem("1", "0"), -1.0),
    ("example, z=10", SLProblem("2 + sin(2*pi*x)", "cos(2*pi*x)"), -100.0),
    ("example, z=200", SLProblem("2 + sin(2*pi*x)", "cos(2*pi*x)"), -40000.0),
    ("example, lambda=60", SLProblem("2 + sin(2*pi*x)", "cos(2*pi*x)"), 3600.0),
]
TOL = 1e-10
Y0 = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])


def timed(kernel, prob, mu, repeat):
    p_prog = kernel.make_program(prob.p.expr)
    v_prog = kernel.make_program(prob.V.expr)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        states, logs, nsteps = kernel.propagate(p_prog, v_prog, mu, Y0, np.array([1.0]), TOL, TOL)
        best = min(best, time.perf_counter() - t0)
    # compare ln|entry| + accumulated log scale, which is independent of where rescaling happened
    return best, nsteps, np.log(np.abs(states[-1].ravel())) + logs[-1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        native = _backend.get_kernel("native")
    except ImportError:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return
    python = _backend.get_kernel("python")
    print(f"{'case':<20} {'steps':>7} {'native [ms]':>12} {'python [ms]':>12} {'speed-up':>9} {'max rel diff':>13}")
    for name, prob, mu in CASES:
        tn, steps, yn = timed(native, prob, mu, args.repeat)
        tp, _, yp = timed(python, prob, mu, args.repeat)
        diff = float(np.max(np.abs(np.expm1(yn - yp))))
        print(f"{name:<20} {steps:>7d} {1e3 * tn:>12.3f} {1e3 * tp:>12.2f} {tp / tn:>9.0f} {diff:>13.1e}")


if __name__ == "__main__":
    main()
