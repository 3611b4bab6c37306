"""Batched complex tridiagonal kernels with a constant off-diagonal."""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def solve_tridiagonal(diag: np.ndarray, off: complex, rhs: np.ndarray) -> np.ndarray:
    """Solve ``A x = rhs`` row by row with the Thomas algorithm.

    ``A`` has diagonal ``diag[b]`` and the same value ``off`` on both off-diagonals.
    ``diag`` and ``rhs`` have shape (batch, n).
    """
    batch, n = rhs.shape
    out = np.empty_like(rhs)
    for b in prange(batch):
        c = np.empty(n, dtype=np.complex128)
        denom = diag[b, 0]
        c[0] = off / denom
        out[b, 0] = rhs[b, 0] / denom
        for i in range(1, n):
            denom = diag[b, i] - off * c[i - 1]
            c[i] = off / denom
            out[b, i] = (rhs[b, i] - off * out[b, i - 1]) / denom
        for i in range(n - 2, -1, -1):
            out[b, i] -= c[i] * out[b, i + 1]
    return out


@njit(cache=True, parallel=True)
def apply_tridiagonal(diag: np.ndarray, off: complex, psi: np.ndarray) -> np.ndarray:
    """Return ``A psi`` for the same matrix layout as :func:`solve_tridiagonal`."""
    batch, n = psi.shape
    out = np.empty_like(psi)
    for b in prange(batch):
        out[b, 0] = diag[b, 0] * psi[b, 0] + off * psi[b, 1]
        for i in range(1, n - 1):
            out[b, i] = diag[b, i] * psi[b, i] + off * (psi[b, i - 1] + psi[b, i + 1])
        out[b, n - 1] = diag[b, n - 1] * psi[b, n - 1] + off * psi[b, n - 2]
    return out
