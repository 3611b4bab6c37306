"""Closed-form Gaussian integrals, symmetrized amplitudes and quadrature oracles."""

from __future__ import annotations

import functools
import math
from collections.abc import Sequence

import numpy as np

from bohmex.errors import TooManyParticles
from bohmex.grid import Grid1D
from bohmex.linalg import permutations_with_parity
from bohmex.packets import GaussianPacketSpec, Species

MAX_ANALYTIC_PARTICLES = 6


def _gaussian_moments(
    pi: GaussianPacketSpec, pj: GaussianPacketSpec
) -> tuple[complex, complex, complex]:
    """Overlap ⟨ψi|ψj⟩, the complex mean μ and the precision a of ψi*ψj."""
    a = 1.0 / (2.0 * pi.sigma_x**2) + 1.0 / (2.0 * pj.sigma_x**2)
    b = pi.x0 / pi.sigma_x**2 + pj.x0 / pj.sigma_x**2 + 1j * (pj.k0 - pi.k0)
    c = -(pi.x0**2) / (2.0 * pi.sigma_x**2) - pj.x0**2 / (2.0 * pj.sigma_x**2)
    prefactor = (math.pi * pi.sigma_x**2) ** -0.25 * (math.pi * pj.sigma_x**2) ** -0.25
    overlap = prefactor * np.sqrt(math.pi / a) * np.exp(b * b / (4.0 * a) + c)
    return complex(overlap), complex(b / (2.0 * a)), complex(a)


def gaussian_overlap(pi: GaussianPacketSpec, pj: GaussianPacketSpec) -> complex:
    """⟨ψi|ψj⟩ over the real line."""
    return _gaussian_moments(pi, pj)[0]


def gaussian_kinetic(pi: GaussianPacketSpec, pj: GaussianPacketSpec) -> complex:
    """⟨ψi| -(ħ²/2m) d²/dx² |ψj⟩ over the real line."""
    overlap, mu, a = _gaussian_moments(pi, pj)
    w = 1.0 / pj.sigma_x**2
    u = 1j * pj.k0 + pj.x0 * w
    second = (u - w * mu) ** 2 + w * w / (2.0 * a) - w
    return -0.5 * pj.units.hbar2_over_m * overlap * second


def _matrices(packets: Sequence[GaussianPacketSpec]) -> tuple[np.ndarray, np.ndarray]:
    n = len(packets)
    S = np.empty((n, n), dtype=np.complex128)
    T = np.empty((n, n), dtype=np.complex128)
    for i, pi in enumerate(packets):
        for j, pj in enumerate(packets):
            S[i, j] = gaussian_overlap(pi, pj)
            T[i, j] = gaussian_kinetic(pi, pj)
    return S, T


def ensemble_kinetic_energy(
    packets: Sequence[GaussianPacketSpec],
    species: Species,
    double_sum: bool = False,
) -> float:
    """Total ⟨T⟩ of the (symmetrized) product of ``packets``, normalized by its norm.

    ``double_sum`` evaluates the full N!·N! bra/ket permutation sum instead of the
    equivalent single sum over relative permutations.
    """
    n = len(packets)
    if n > MAX_ANALYTIC_PARTICLES:
        raise TooManyParticles(
            f"analytic permutation sums support N <= {MAX_ANALYTIC_PARTICLES}, got {n}"
        )
    if n == 0:
        return 0.0
    S, T = _matrices(packets)
    if species is Species.DISTINGUISHABLE:
        return float(np.real(np.trace(T)))

    perms = permutations_with_parity(n)
    if double_sum:
        pairs = [(p, q, pp * qp) for p, pp in perms for q, qp in perms]
    else:
        identity = tuple(range(n))
        pairs = [(identity, q, qp) for q, qp in perms]

    norm = 0.0 + 0.0j
    energy = 0.0 + 0.0j
    for p, q, parity in pairs:
        sign = species.permutation_sign(parity)
        factors = S[list(p), list(q)]
        norm += sign * np.prod(factors)
        for j in range(n):
            rest = np.prod(np.delete(factors, j))
            energy += sign * T[p[j], q[j]] * rest
    return float(np.real(energy / norm))


def orbital_matrix(packets: Sequence[GaussianPacketSpec], x: np.ndarray) -> np.ndarray:
    """A[..., l, i] = ψ_l(x_i) for configurations ``x[..., N]``."""
    x = np.asarray(x, dtype=float)
    return np.stack([p.amplitude(x) for p in packets], axis=-2)


def symmetrized_amplitude(
    packets: Sequence[GaussianPacketSpec], species: Species, x: np.ndarray
) -> np.ndarray:
    """Unnormalized Σ_p sgn(p) Π_i ψ_{p(i)}(x_i) at configurations ``x[..., N]``."""
    A = orbital_matrix(packets, x)
    n = len(packets)
    if species is Species.DISTINGUISHABLE:
        return np.prod(np.diagonal(A, axis1=-2, axis2=-1), axis=-1)
    if species is Species.FERMION:
        return np.linalg.det(A)
    total = np.zeros(A.shape[:-2], dtype=np.complex128)
    cols = np.arange(n)
    for perm, _ in permutations_with_parity(n):
        total = total + np.prod(A[..., list(perm), cols], axis=-1)
    return total


def spin_mixed_norm_check(
    packets: Sequence[GaussianPacketSpec], x: Sequence[float]
) -> tuple[float, float]:
    """|Φ|² of the (↑,↓,↓) antisymmetrized state and its spin-factorized approximation.

    The exact value keeps every product whose spin overlap is one: each orbital in turn
    occupies the ↑ coordinate while the other two form a ↓ determinant. The approximation
    keeps only the assignment with orbital 1 in the ↑ coordinate.
    """
    if len(packets) != 3 or len(x) != 3:
        raise ValueError("spin check needs exactly three packets and three positions")
    x1, x2, x3 = (float(v) for v in x)
    terms = []
    for up in range(3):
        a, b = (i for i in range(3) if i != up)
        pa, pb = packets[a], packets[b]
        down = pa.amplitude(x2) * pb.amplitude(x3) - pa.amplitude(x3) * pb.amplitude(x2)
        terms.append(float(np.abs(packets[up].amplitude(x1)) ** 2 * np.abs(down) ** 2))
    return sum(terms), terms[0]


def grid_kinetic_energy(
    packets: Sequence[GaussianPacketSpec], species: Species, grid: Grid1D
) -> float:
    """⟨T⟩ by direct quadrature of |∇Ψ|² on the N-dimensional tensor grid.

    Orbital derivatives are analytic, so the only discretization error is the quadrature.
    Memory grows as n_points**N; intended for N <= 3 cross-checks.
    """
    n = len(packets)
    if n > MAX_ANALYTIC_PARTICLES:
        raise TooManyParticles(f"grid quadrature supports N <= {MAX_ANALYTIC_PARTICLES}")
    values = [p.amplitude(grid.x) for p in packets]
    slopes = [p.derivative(grid.x) for p in packets]
    if species is Species.DISTINGUISHABLE:
        perms = ((tuple(range(n)), 1),)
    else:
        perms = permutations_with_parity(n)

    def outer(factors: list[np.ndarray]) -> np.ndarray:
        return functools.reduce(np.multiply.outer, factors)

    psi = sum(species.permutation_sign(par) * outer([values[p[i]] for i in range(n)])
              for p, par in perms)
    gradient_sq = np.zeros_like(psi, dtype=float)
    for j in range(n):
        d_psi = sum(
            species.permutation_sign(par)
            * outer([slopes[p[i]] if i == j else values[p[i]] for i in range(n)])
            for p, par in perms
        )
        gradient_sq += np.abs(d_psi) ** 2
    units = packets[0].units
    return float(0.5 * units.hbar2_over_m * gradient_sq.sum() / (np.abs(psi) ** 2).sum())
