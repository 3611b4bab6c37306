"""Determinants, permanents and their cofactor matrices for small complex matrices."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from numba import njit

from bohmex.packets import Species

MAX_PERMANENT_ORDER = 8


@lru_cache(maxsize=16)
def permutations_with_parity(n: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """All permutations of range(n) with their parity (+1 even, -1 odd)."""
    out = []
    for perm in itertools.permutations(range(n)):
        inversions = sum(
            1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]
        )
        out.append((perm, -1 if inversions % 2 else 1))
    return tuple(out)


@njit(cache=True)
def _permanent_ryser(M: np.ndarray) -> complex:
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    for subset in range(1, 1 << n):
        prod = 1.0 + 0.0j
        for i in range(n):
            row_sum = 0.0 + 0.0j
            mask = subset
            col = 0
            while mask > 0:
                if mask & 1:
                    row_sum += M[i, col]
                mask >>= 1
                col += 1
            prod *= row_sum
        popcount = 0
        tmp = subset
        while tmp > 0:
            tmp &= tmp - 1
            popcount += 1
        if (n - popcount) % 2:
            total -= prod
        else:
            total += prod
    return total


@njit(cache=True)
def _permanent_minors(T: np.ndarray) -> np.ndarray:
    batch, n = T.shape[0], T.shape[1]
    out = np.empty((batch, n, n), dtype=np.complex128)
    minor = np.empty((n - 1, n - 1), dtype=np.complex128)
    for b in range(batch):
        for row in range(n):
            for col in range(n):
                r = 0
                for i in range(n):
                    if i == row:
                        continue
                    c = 0
                    for j in range(n):
                        if j == col:
                            continue
                        minor[r, c] = T[b, i, j]
                        c += 1
                    r += 1
                out[b, row, col] = _permanent_ryser(minor)
    return out


def permanent(M: np.ndarray) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula."""
    M = np.ascontiguousarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_PERMANENT_ORDER:
        raise ValueError(f"permanent limited to order {MAX_PERMANENT_ORDER}")
    return complex(_permanent_ryser(M))


def _minor_index(n: int) -> np.ndarray:
    return np.array([[i for i in range(n) if i != skip] for skip in range(n)], dtype=np.int64)


def cofactors(T: np.ndarray, species: Species) -> np.ndarray:
    """Cofactor matrices of a stack of square matrices ``T[..., N, N]``.

    Fermions get signed determinant minors, bosons permanent minors. Distinguishable
    particles never mix rows, so their "cofactor" is the identity weighting.
    """
    T = np.asarray(T, dtype=np.complex128)
    squeeze = T.ndim == 2
    if squeeze:
        T = T[None]
    batch, n = T.shape[0], T.shape[-1]

    if species is Species.DISTINGUISHABLE:
        out = np.broadcast_to(np.eye(n, dtype=np.complex128), (batch, n, n)).copy()
    elif n == 1:
        out = np.ones((batch, 1, 1), dtype=np.complex128)
    elif species is Species.FERMION:
        idx = _minor_index(n)
        minors = T[:, idx[:, None, :, None], idx[None, :, None, :]]
        signs = (-1.0) ** np.add.outer(np.arange(n), np.arange(n))
        out = np.linalg.det(minors) * signs
    else:
        if n > MAX_PERMANENT_ORDER:
            raise ValueError(f"permanent cofactors limited to order {MAX_PERMANENT_ORDER}")
        out = _permanent_minors(np.ascontiguousarray(T))
    return out[0] if squeeze else out


def symmetrized_product(T: np.ndarray, species: Species) -> complex:
    """Σ_p sgn(p) Π_k T[p(k), k] by explicit enumeration of permutations."""
    T = np.asarray(T, dtype=np.complex128)
    n = T.shape[0]
    if species is Species.DISTINGUISHABLE:
        return complex(np.prod(np.diag(T)))
    total = 0.0 + 0.0j
    cols = np.arange(n)
    for perm, parity in permutations_with_parity(n):
        total += species.permutation_sign(parity) * np.prod(T[list(perm), cols])
    return complex(total)
