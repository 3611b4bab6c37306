"""Expectation values of wave fields by trapezoid quadrature."""

from __future__ import annotations

from enum import StrEnum

import numpy as np
from scipy.integrate import trapezoid

from bohmex.errors import NotNormalized
from bohmex.grid import WaveField1D, WaveField2D
from bohmex.tdse.potentials import Potential1D, Potential2D
from bohmex.units import FREE_ELECTRON, UnitSystem

NORM_TOLERANCE = 1e-6


class Observable(StrEnum):
    KINETIC = "T"
    POTENTIAL = "V"
    HAMILTONIAN = "H"
    POSITION = "x"


def laplacian(amplitudes: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Three-point second difference with zero amplitude beyond the grid edges."""
    padded = np.moveaxis(amplitudes, axis, -1)
    out = -2.0 * padded
    out[..., 1:] += padded[..., :-1]
    out[..., :-1] += padded[..., 1:]
    return np.moveaxis(out, -1, axis) / dx**2


def _integrate(values: np.ndarray, psi: WaveField1D | WaveField2D) -> float:
    if isinstance(psi, WaveField1D):
        return float(np.real(trapezoid(values, dx=psi.grid.dx)))
    inner = trapezoid(values, dx=psi.grid_x2.dx, axis=1)
    return float(np.real(trapezoid(inner, dx=psi.grid_x1.dx)))


def expectation(
    psi: WaveField1D | WaveField2D,
    observable: Observable | str,
    potential: Potential1D | Potential2D | None = None,
    units: UnitSystem = FREE_ELECTRON,
    particle: int | None = None,
) -> float:
    """⟨ψ|Ô|ψ⟩ for a normalized field.

    For 2D fields ``particle`` selects T_j or x_j (1 or 2); ``None`` sums both
    kinetic terms. The kinetic operator uses the same three-point Laplacian as the
    propagator.
    """
    observable = Observable(observable)
    norm = psi.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NotNormalized(norm, NORM_TOLERANCE)
    amp = psi.amplitudes
    conj = np.conj(amp)

    if observable is Observable.POSITION:
        if isinstance(psi, WaveField1D):
            return _integrate(psi.density * psi.grid.x, psi)
        if particle not in (1, 2):
            raise ValueError("position of a 2D field needs particle=1 or particle=2")
        coord = psi.grid_x1.x[:, None] if particle == 1 else psi.grid_x2.x[None, :]
        return _integrate(psi.density * coord, psi)

    total = 0.0
    if observable in (Observable.KINETIC, Observable.HAMILTONIAN):
        prefactor = -0.5 * units.hbar2_over_m
        if isinstance(psi, WaveField1D):
            total += _integrate(conj * prefactor * laplacian(amp, psi.grid.dx), psi)
        else:
            axes = (1, 2) if particle is None or observable is Observable.HAMILTONIAN else (
                particle,
            )
            for j in axes:
                dx = psi.grid_x1.dx if j == 1 else psi.grid_x2.dx
                total += _integrate(conj * prefactor * laplacian(amp, dx, axis=j - 1), psi)

    if observable in (Observable.POTENTIAL, Observable.HAMILTONIAN):
        if potential is None:
            raise ValueError(f"observable {observable} needs a potential")
        if isinstance(psi, WaveField1D):
            values = potential.evaluate(psi.grid.x)
        else:
            values = potential.evaluate(psi.grid_x1.x, psi.grid_x2.x)
        total += _integrate(psi.density * values, psi)
    return total
