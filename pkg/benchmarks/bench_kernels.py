#!/usr/bin/env python3
"""Compare the compiled and NumPy kernel backends.

Times the three dispatched kernels (Gaussian field sampling, full sparse
matvec, row-subset matvec) at a few grid sizes, plus end-to-end simulation
steps of the bundled ``gauntlet15`` scenario, under each available backend.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 7] [--sizes 35,70,140]
                                        [--steps 10]
"""

import argparse
import statistics
import time

import numpy as np

from swarmsafe import kernels
from swarmsafe.fields import GaussianShape, robot_density
from swarmsafe.grid import Grid, RegionMask, build_operators
from swarmsafe.sim import Simulation, load_scenario


def _time(fn, repeats, inner):
    """Median seconds per call of ``fn`` over ``repeats`` timed batches."""
    fn()  # warm up (JIT-free, but populates caches/allocators)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - t0) / inner)
    return statistics.median(samples)


def _micro_cases(size):
    grid = Grid(nx=size, ny=size, cell=0.1)
    ops = build_operators(grid)
    shape = GaussianShape.isotropic(25.0)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(grid.n_cells)
    mask = RegionMask.from_circle(grid, (0.0, 0.0), 0.2 * size * grid.cell)
    rows = mask.indices
    return {
        "gaussian_field": lambda: robot_density(grid, (0.123, -0.456), shape),
        "matvec": lambda: ops.laplacian.apply(x),
        "rows_matvec": lambda: ops.grad_x.apply_rows(x, rows),
    }


def _fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    return f"{seconds * 1e3:8.2f} ms"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed batches per case (median is reported)")
    parser.add_argument("--inner", type=int, default=50,
                        help="calls per timed batch for the micro kernels")
    parser.add_argument("--sizes", default="35,70,140",
                        help="comma-separated square grid sizes")
    parser.add_argument("--steps", type=int, default=10,
                        help="simulation steps for the end-to-end case")
    args = parser.parse_args(argv)

    backends = kernels.available()
    print(f"backends: {', '.join(backends)} (active: {kernels.active()})")
    if len(backends) < 2:
        print("note: compiled extension not built; timing the NumPy backend only")

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = []
    for size in sizes:
        cases = _micro_cases(size)
        for name, fn in cases.items():
            timings = {}
            for backend in backends:
                before = kernels.use(backend)
                try:
                    timings[backend] = _time(fn, args.repeats, args.inner)
                finally:
                    kernels.use(before)
            rows.append((f"{name} {size}x{size}", timings))

    def bench_steps(mode):
        scenario = load_scenario("gauntlet15")
        sim = Simulation(scenario, mode=mode)
        t0 = time.perf_counter()
        for _ in range(args.steps):
            sim.step()
        return (time.perf_counter() - t0) / args.steps

    for mode in ("decentralized", "centralized"):
        timings = {}
        for backend in backends:
            before = kernels.use(backend)
            try:
                timings[backend] = min(bench_steps(mode)
                                       for _ in range(max(1, args.repeats // 2)))
            finally:
                kernels.use(before)
        rows.append((f"gauntlet15 step ({mode})", timings))

    width = max(len(label) for label, _ in rows)
    header = f"{'case':<{width}}"
    for backend in backends:
        header += f"  {backend:>12}"
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, timings in rows:
        line = f"{label:<{width}}"
        for backend in backends:
            line += f"  {_fmt(timings[backend]):>12}"
        if len(backends) == 2:
            ratio = timings["numpy"] / timings["compiled"]
            line += f"  {ratio:7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
