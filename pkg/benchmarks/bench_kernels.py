"""Time the inner y-loop on both backends.

Usage::

    python3 benchmarks/bench_kernels.py [--iters 2000] [--repeat 5] [--q 1 20 100]

Prints the median wall time per call and the speedup of the compiled kernel.
Both backends run the same number of iterations (tolerance 0), and their
outputs are compared so a speedup never hides a wrong answer.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from foops import kernels
from foops.oracles import OracleKind, OracleState
from foops.problems import make_example1


def _time(problem, x, y0, iters, kind, repeat):
    times = []
    out = None
    for _ in range(repeat):
        state = OracleState.fresh(problem.dim)
        t0 = time.perf_counter()
        out = kernels.inner_loop(problem, x, y0, 1.0, 0.01, 0.01, iters, 0.0, kind, state)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out[0]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--q", type=int, nargs="+", default=[1, 20, 100])
    ap.add_argument("--oracle", default="pgd", choices=["pgd", "momentum", "nesterov", "adam"])
    args = ap.parse_args(argv)

    if "cython" not in kernels.AVAILABLE:
        print("compiled extension not built; only the Python backend is available")
        return 1
    kind = OracleKind(args.oracle, coef=0.5) if args.oracle in ("momentum", "nesterov") else OracleKind(args.oracle)
    rng = np.random.default_rng(0)
    print(f"{'q':>5} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max |dy|':>10}")
    for q in args.q:
        problem, _ = make_example1(q, normalized=True)
        x = rng.uniform(-0.5, 0.5, q)
        y0 = x + 0.1 * rng.normal(size=q)
        with kernels.use_backend("python"):
            tp, yp = _time(problem, x, y0, args.iters, kind, args.repeat)
        with kernels.use_backend("cython"):
            tc, yc = _time(problem, x, y0, args.iters, kind, args.repeat)
        print(f"{q:>5} {1e3 * tp:>12.2f} {1e3 * tc:>12.3f} {tp / tc:>8.1f} {np.max(np.abs(yp - yc)):>10.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
