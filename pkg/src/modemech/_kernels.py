"""Hot photon-sampling kernels: numba-jitted with a pure-numpy fallback.

The inner loop of the Monte-Carlo oracle draws millions of photon cell
indices by inverse-CDF lookup (marginal in x, conditional in y). The
numba path does a per-photon binary search; the numpy path performs the
same comparisons with chunked broadcasting. Both paths consume identical
uniforms and use identical comparison semantics (``searchsorted``
side="right"), so they produce bit-identical indices.

Set the environment variable ``MODEMECH_DISABLE_NUMBA=1`` to force the
numpy path (checked on every call; ``benchmarks/bench_kernels.py``
compares the two).
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "MODEMECH_DISABLE_NUMBA"

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    numba = None
    _HAVE_NUMBA = False


def numba_active() -> bool:
    """True if the jitted path will be used for the next kernel call."""
    return _HAVE_NUMBA and os.environ.get(DISABLE_ENV, "0").strip() in ("", "0")


def sample_cell_indices_numpy(
    cdf_x: np.ndarray,
    cond_cdf_y: np.ndarray,
    u_col: np.ndarray,
    u_row: np.ndarray,
    chunk: int = 8192,
) -> tuple[np.ndarray, np.ndarray]:
    ix = np.searchsorted(cdf_x, u_col, side="right").astype(np.int64)
    iy = np.empty(u_row.shape[0], dtype=np.int64)
    for start in range(0, u_row.shape[0], chunk):
        sl = slice(start, start + chunk)
        rows = cond_cdf_y[ix[sl]]
        # count of cdf values <= u  ==  searchsorted side="right"
        iy[sl] = (rows <= u_row[sl, None]).sum(axis=1)
    return ix, iy


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _bisect_right(a, v):
        lo = 0
        hi = a.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if v < a[mid]:
                hi = mid
            else:
                lo = mid + 1
        return lo

    @numba.njit(cache=True)
    def _sample_cell_indices_jit(cdf_x, cond_cdf_y, u_col, u_row, ix_out, iy_out):
        for p in range(u_col.shape[0]):
            ix = _bisect_right(cdf_x, u_col[p])
            ix_out[p] = ix
            iy_out[p] = _bisect_right(cond_cdf_y[ix], u_row[p])

    def sample_cell_indices_numba(cdf_x, cond_cdf_y, u_col, u_row):
        ix = np.empty(u_col.shape[0], dtype=np.int64)
        iy = np.empty(u_col.shape[0], dtype=np.int64)
        _sample_cell_indices_jit(
            np.ascontiguousarray(cdf_x),
            np.ascontiguousarray(cond_cdf_y),
            u_col,
            u_row,
            ix,
            iy,
        )
        return ix, iy

else:  # pragma: no cover

    def sample_cell_indices_numba(cdf_x, cond_cdf_y, u_col, u_row):
        raise RuntimeError("numba is not available")


def sample_cell_indices(cdf_x, cond_cdf_y, u_col, u_row):
    """Dispatch to the jitted kernel unless disabled by env flag."""
    if numba_active():
        return sample_cell_indices_numba(cdf_x, cond_cdf_y, u_col, u_row)
    return sample_cell_indices_numpy(cdf_x, cond_cdf_y, u_col, u_row)
