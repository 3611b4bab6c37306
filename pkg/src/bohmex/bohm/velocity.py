"""Bohmian velocity and quantum potential from sampled wave functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bohmex.errors import NodeRegion
from bohmex.grid import Grid1D, WaveField1D
from bohmex.units import FREE_ELECTRON, UnitSystem

NODE_THRESHOLD = 1e-6
STENCIL_OFFSETS = np.array([-1, 0, 1, 2])


@dataclass
class VelocityField:
    x: np.ndarray
    velocity: np.ndarray
    node: np.ndarray


@dataclass
class Guidance:
    """Velocity, quantum potential and |ψ| at trajectory positions."""

    velocity: np.ndarray
    quantum: np.ndarray
    modulus: np.ndarray
    node: np.ndarray


def _phase_velocity(left: np.ndarray, right: np.ndarray, dx: float, units: UnitSystem):
    return units.hbar_over_m * np.angle(right * np.conj(left)) / dx


def velocity_field(psi: WaveField1D, units: UnitSystem = FREE_ELECTRON) -> VelocityField:
    """v = (ħ/m) Im(ψ'/ψ) on the grid; node points carry NaN and a flag.

    The phase gradient is taken from the phase difference of neighbouring samples,
    which is exact for linear and quadratic phases, then averaged onto the grid nodes.
    """
    amp = psi.amplitudes
    modulus = np.abs(amp)
    if not np.any(modulus > 0):
        raise ValueError("velocity field of a null wave function")
    mid = _phase_velocity(amp[:-1], amp[1:], psi.grid.dx, units)
    velocity = np.empty(amp.size)
    velocity[1:-1] = 0.5 * (mid[:-1] + mid[1:])
    velocity[0], velocity[-1] = mid[0], mid[-1]
    node = modulus <= NODE_THRESHOLD * modulus.max()
    velocity[node] = np.nan
    return VelocityField(x=psi.grid.x, velocity=velocity, node=node)


def _curvature_ratio(left, centre, right, dx):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (left - 2.0 * centre + right) / (dx * dx * centre)


def quantum_potential(
    psi: WaveField1D, x: float, units: UnitSystem = FREE_ELECTRON
) -> float:
    """Q(x) = -(ħ²/2m) R''/R with R = |ψ|, interpolated between grid nodes."""
    modulus = np.abs(psi.amplitudes)
    grid = psi.grid
    if abs(float(grid.interpolate(modulus, np.asarray(x)))) <= NODE_THRESHOLD * modulus.max():
        raise NodeRegion(f"|psi| below node threshold at x={x:g} nm")
    padded = np.concatenate([[0.0], modulus, [0.0]])
    ratio = _curvature_ratio(padded[:-2], padded[1:-1], padded[2:], grid.dx)
    idx, frac = grid.locate(np.asarray(x))
    q_lo, q_hi = ratio[idx], ratio[idx + 1]
    return float(-0.5 * units.hbar2_over_m * (q_lo + (q_hi - q_lo) * frac))


def gather_stencil(
    values: np.ndarray, grid: Grid1D, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Four samples ψ[i-1..i+2] around each point of cell i, plus the offset in the cell.

    ``values`` is (n,) or (..., n) matching the leading shape of ``x``.
    """
    idx, frac = grid.locate(x)
    cols = np.clip(idx[..., None] + STENCIL_OFFSETS, 0, grid.n_points - 1)
    if values.ndim == 1:
        return values[cols], frac
    return np.take_along_axis(values, cols, axis=-1), frac


def local_guidance(
    stencil: np.ndarray,
    frac: np.ndarray,
    dx: float,
    units: UnitSystem = FREE_ELECTRON,
    peak: np.ndarray | float | None = None,
) -> Guidance:
    """Guidance quantities at points inside cell [x_i, x_i+1] from stencils ψ[i-1..i+2].

    Velocity is interpolated between the mid-cell phase velocities, Q between the
    node values of the three-point curvature. Points where |ψ| is at most
    ``NODE_THRESHOLD * peak`` are flagged.
    """
    s_m, s_0, s_1, s_2 = (stencil[..., k] for k in range(4))
    v_left = _phase_velocity(s_m, s_0, dx, units)
    v_mid = _phase_velocity(s_0, s_1, dx, units)
    v_right = _phase_velocity(s_1, s_2, dx, units)
    velocity = np.where(
        frac < 0.5,
        v_left + (v_mid - v_left) * (frac + 0.5),
        v_mid + (v_right - v_mid) * (frac - 0.5),
    )

    r = np.abs(stencil)
    q0 = _curvature_ratio(r[..., 0], r[..., 1], r[..., 2], dx)
    q1 = _curvature_ratio(r[..., 1], r[..., 2], r[..., 3], dx)
    quantum = -0.5 * units.hbar2_over_m * (q0 + (q1 - q0) * frac)
    modulus = r[..., 1] + (r[..., 2] - r[..., 1]) * frac

    if peak is None:
        peak = r.max(axis=-1)
    node = (modulus <= NODE_THRESHOLD * np.asarray(peak)) | ~np.isfinite(quantum)
    return Guidance(velocity=velocity, quantum=quantum, modulus=modulus, node=node)
