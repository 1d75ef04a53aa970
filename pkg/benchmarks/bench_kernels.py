#!/usr/bin/env python3
"""Benchmark the numba photon-sampling kernel against the numpy fallback.

The numpy path (selected at runtime by MODEMECH_DISABLE_NUMBA=1) performs
the conditional inverse-CDF lookup by chunked broadcasting, the numba
path by per-photon binary search. Both produce bit-identical indices;
this script checks that and times them.

Run:  python3 benchmarks/bench_kernels.py [n_photons]
"""

import os
import sys
import time

import numpy as np

import modemech as mm
from modemech import _kernels


def build_cdfs(grid_n: int = 512):
    grid = mm.default_grid(0.3e-4, 1e-4, n=grid_n)
    u = mm.hg_mode(0, 0, 0.3e-4, (0.0, 0.0), grid)
    p = np.abs(u.amplitude) ** 2 * grid.weights
    px = p.sum(axis=1)
    cdf_x = np.cumsum(px) / px.sum()
    cdf_x[-1] = 1.0
    row = p.sum(axis=1, keepdims=True)
    cond = np.cumsum(p, axis=1) / np.where(row > 0, row, 1.0)
    cond[:, -1] = 1.0
    return u, cdf_x, cond


def time_fn(fn, *args, repeats: int = 3):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    u, cdf_x, cond = build_cdfs()
    rng = np.random.default_rng(42)
    u_col = rng.random(n)
    u_row = rng.random(n)

    print(f"sampling {n:,} photon cell indices on a {cdf_x.size}^2 grid")
    if not _kernels.numba_active():
        print("numba unavailable or disabled; timing the numpy path only")
        t_np, _ = time_fn(_kernels.sample_cell_indices_numpy, cdf_x, cond, u_col, u_row)
        print(f"numpy : {t_np:8.3f} s")
        return

    # warm up the JIT before timing
    _kernels.sample_cell_indices_numba(cdf_x, cond, u_col[:1000], u_row[:1000])
    t_nb, (ix_nb, iy_nb) = time_fn(
        _kernels.sample_cell_indices_numba, cdf_x, cond, u_col, u_row
    )
    t_np, (ix_np, iy_np) = time_fn(
        _kernels.sample_cell_indices_numpy, cdf_x, cond, u_col, u_row, repeats=1
    )
    same = np.array_equal(ix_nb, ix_np) and np.array_equal(iy_nb, iy_np)
    print(f"numba : {t_nb:8.3f} s")
    print(f"numpy : {t_np:8.3f} s")
    print(f"speedup x{t_np / t_nb:.1f}, outputs bit-identical: {same}")

    # end-to-end arrival simulation under both backends
    flux, dt, n_bins = 1e9, 30.5e-9, 32768
    t0 = time.perf_counter()
    b_nb = mm.simulate_arrivals(u, flux, n_bins * dt, dt, seed=1)
    t_e2e_nb = time.perf_counter() - t0
    os.environ[_kernels.DISABLE_ENV] = "1"
    try:
        t0 = time.perf_counter()
        b_np = mm.simulate_arrivals(u, flux, n_bins * dt, dt, seed=1)
        t_e2e_np = time.perf_counter() - t0
    finally:
        os.environ.pop(_kernels.DISABLE_ENV, None)
    same_e2e = np.array_equal(b_nb.x, b_np.x) and np.array_equal(b_nb.y, b_np.y)
    print(
        f"simulate_arrivals ({b_nb.n_photons:,} photons): "
        f"numba {t_e2e_nb:.3f} s, numpy {t_e2e_np:.3f} s, "
        f"batches bit-identical: {same_e2e}"
    )


if __name__ == "__main__":
    main()
