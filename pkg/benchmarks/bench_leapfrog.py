"""Compare the compiled and NumPy leapfrog kernels on a scenario-sized grid.

    python benchmarks/bench_leapfrog.py [--nx 115 --ny 459 --steps 200]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from procrustes_povm.tdse.kernels import BACKENDS


def make_inputs(nx: int, ny: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, nx, ny, 2))
    vd = rng.uniform(0, 10, (nx, ny, 2))
    wr = rng.uniform(-1, 1, (nx, ny))
    wi = rng.uniform(-1, 1, (nx, ny))
    return u, v, vd, wr, wi


def run(backend, steps: int, nx: int, ny: int, with_coupling: bool):
    u, v, vd, wr, wi = make_inputs(nx, ny)
    if not with_coupling:
        wr = wi = None
    k = BACKENDS[backend]
    t = time.perf_counter()
    for _ in range(steps):
        k.update_u(u, v, vd, wr, wi, 25.0, 25.0, 1e-4)
        k.update_v(u, v, vd, wr, wi, 25.0, 25.0, 1e-4)
    return (time.perf_counter() - t) / steps, u, v


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nx", type=int, default=115)
    p.add_argument("--ny", type=int, default=459)
    p.add_argument("--steps", type=int, default=200)
    a = p.parse_args(argv)
    print(f"grid {a.nx}x{a.ny}, {a.steps} steps; backends: {sorted(BACKENDS)}")
    for coupling in (False, True):
        res = {b: run(b, a.steps, a.nx, a.ny, coupling) for b in sorted(BACKENDS)}
        label = "with spin coupling" if coupling else "diagonal potential"
        for b, (dt, _, _) in res.items():
            print(f"  {label:20s} {b:9s} {dt * 1e3:8.3f} ms/step")
        if "compiled" in res:
            _, uc, vc = res["compiled"]
            _, up, vp = res["python"]
            diff = max(np.abs(uc - up).max(), np.abs(vc - vp).max())
            print(f"  {label:20s} speedup {res['python'][0] / res['compiled'][0]:.1f}x, max |diff| {diff:.1e}")


if __name__ == "__main__":
    main()
