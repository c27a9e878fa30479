"""Time the FD coefficient kernel under both backends.

    python benchmarks/bench_kernels.py [--points 2000] [--repeat 3] [--dx 1e-3]
"""
import argparse
import time

import numpy as np

from scatter1d import _kernels, jolanta_potential
from scatter1d.fdsolver import make_grid
from scatter1d.model import DEFAULT


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--dx", type=float, default=1e-3)
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()

    pot = jolanta_potential()
    E = np.linspace(0.1, 2.0, args.points)
    grid = make_grid(pot.a, float(DEFAULT.wavenumber(E.min())), args.dx)
    v = pot(grid.x)
    print(f"grid points {grid.x.size}, energies {E.size}")

    results = {}
    backends = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])
    for b in backends:
        if b == "numba":
            print(f"numba threads {_kernels.set_threads(args.threads)}")
            _kernels.coefficients(v, grid.x, E[:2], DEFAULT.c2m, b)  # compile outside the timing
        dt, out = best_of(lambda: _kernels.coefficients(v, grid.x, E, DEFAULT.c2m, b), args.repeat)
        results[b] = out
        rate = E.size * grid.x.size / dt / 1e6
        print(f"{b:6s} {dt:8.3f} s   {rate:8.1f} M site-updates/s")
    if len(results) == 2:
        A1, A2 = results["numpy"][0], results["numba"][0]
        d = np.max(np.abs(1 / A1 - 1 / A2))
        print(f"max |T_numpy - T_numba|: {d:.2e}")


if __name__ == "__main__":
    main()
