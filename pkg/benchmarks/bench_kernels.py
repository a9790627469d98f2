"""Time the compiled CHSH kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--grid N] [--batch N] [--repeat N]``.
"""

import argparse
import math
import timeit

import numpy as np

from qcausal import _kernels_py, bell

try:
    from qcausal import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--grid", type=int, default=64)
    parser.add_argument("--batch", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    state = bell.make_phi_plus()
    angles = np.arange(args.grid) * (math.pi / args.grid)
    E = bell.correlator_table(state, angles, angles)
    T = bell.correlation_block(state)
    quads = np.ascontiguousarray(np.random.default_rng(0).uniform(0, math.pi, (args.batch, 4)))

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))
    else:
        print("compiled extension not built; timing the fallback only")

    results = {}
    for name, impl in backends:
        g = min(timeit.repeat(lambda: impl.chsh_grid_max(E), number=1, repeat=args.repeat))
        b = min(timeit.repeat(lambda: impl.chsh_batch(T, quads), number=1, repeat=args.repeat))
        results[name] = (g, b, impl.chsh_grid_max(E))
        print(f"{name:7s} grid {args.grid}^4: {g * 1e3:9.2f} ms   batch {args.batch}: {b * 1e3:8.2f} ms")

    if len(results) == 2:
        (gp, bp, rp), (gc, bc, rc) = results["python"], results["cython"]
        print(f"speedup  grid {gp / gc:6.1f}x   batch {bp / bc:6.1f}x")
        print(f"identical grid result: {rp == rc}  (|S| = {rc[0]!r})")


if __name__ == "__main__":
    main()
