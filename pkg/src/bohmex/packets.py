"""Gaussian packets, particle species and symmetrized two-particle states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from bohmex.errors import DegenerateState, GridTooNarrow, MixedWidths
from bohmex.grid import Grid1D, WaveField1D, WaveField2D
from bohmex.units import FREE_ELECTRON, UnitSystem

SPAN_SIGMAS = 6.0
DEGENERATE_NORM = 1e-12


class Species(StrEnum):
    FERMION = "fermion"
    BOSON = "boson"
    DISTINGUISHABLE = "distinguishable"

    @property
    def identical(self) -> bool:
        return self is not Species.DISTINGUISHABLE

    def permutation_sign(self, parity: int) -> int:
        """Weight of a permutation with the given parity (+1 even, -1 odd)."""
        return parity if self is Species.FERMION else 1


@dataclass(frozen=True)
class GaussianPacketSpec:
    """ψ(x) = (πσ²)^(-1/4) exp(ik₀x) exp(-(x-x₀)²/(2σ²))."""

    x0: float
    k0: float
    sigma_x: float
    units: UnitSystem = field(default=FREE_ELECTRON, compare=False)

    def __post_init__(self) -> None:
        if self.sigma_x <= 0:
            raise ValueError(f"sigma_x must be positive, got {self.sigma_x}")

    @classmethod
    def from_energy(
        cls,
        x0: float,
        energy: float,
        sigma_x: float,
        units: UnitSystem = FREE_ELECTRON,
        direction: int = 1,
    ) -> GaussianPacketSpec:
        k0 = math.copysign(units.wave_vector(energy), direction)
        return cls(x0=x0, k0=k0, sigma_x=sigma_x, units=units)

    @property
    def e0(self) -> float:
        return self.units.energy(self.k0)

    @property
    def sigma_k(self) -> float:
        return 1.0 / self.sigma_x

    def amplitude(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        norm = (math.pi * self.sigma_x**2) ** -0.25
        return norm * np.exp(1j * self.k0 * x - (x - self.x0) ** 2 / (2.0 * self.sigma_x**2))

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (1j * self.k0 - (x - self.x0) / self.sigma_x**2) * self.amplitude(x)

    def fits(self, grid: Grid1D, sigmas: float = SPAN_SIGMAS) -> bool:
        return (
            self.x0 - sigmas * self.sigma_x >= grid.x_min
            and self.x0 + sigmas * self.sigma_x <= grid.x_max
        )


def _require_fit(spec: GaussianPacketSpec, grid: Grid1D) -> None:
    if not spec.fits(grid):
        raise GridTooNarrow(
            f"packet at x0={spec.x0:g} nm with sigma={spec.sigma_x:g} nm needs "
            f"[{spec.x0 - SPAN_SIGMAS * spec.sigma_x:g}, {spec.x0 + SPAN_SIGMAS * spec.sigma_x:g}]"
            f" but grid spans [{grid.x_min:g}, {grid.x_max:g}]"
        )


def build_packet(spec: GaussianPacketSpec, grid: Grid1D) -> WaveField1D:
    """Sample a Gaussian packet on ``grid``."""
    _require_fit(spec, grid)
    return WaveField1D(grid=grid, amplitudes=spec.amplitude(grid.x))


def build_manybody_2d(
    p1: GaussianPacketSpec,
    p2: GaussianPacketSpec,
    species: Species,
    grid_x1: Grid1D,
    grid_x2: Grid1D | None = None,
) -> WaveField2D:
    """Product, Slater determinant or permanent of two packets, normalized on the grid."""
    grid_x2 = grid_x2 or grid_x1
    _require_fit(p1, grid_x1)
    _require_fit(p2, grid_x2)

    direct = np.outer(p1.amplitude(grid_x1.x), p2.amplitude(grid_x2.x))
    if species is Species.DISTINGUISHABLE:
        amplitudes = direct
    else:
        _require_fit(p2, grid_x1)
        _require_fit(p1, grid_x2)
        exchanged = np.outer(p2.amplitude(grid_x1.x), p1.amplitude(grid_x2.x))
        amplitudes = direct - exchanged if species is Species.FERMION else direct + exchanged

    state = WaveField2D(grid_x1, grid_x2, amplitudes, species=species)
    norm = state.norm()
    if norm < DEGENERATE_NORM:
        raise DegenerateState(
            f"{species} state of packets at x0={p1.x0:g} and x0={p2.x0:g} has norm {norm:.3e}"
        )
    return state.normalized()


def phase_space_distance(p1: GaussianPacketSpec, p2: GaussianPacketSpec) -> float:
    """Normalized separation of two equal-width packets in (x₀, k₀) space."""
    if not math.isclose(p1.sigma_x, p2.sigma_x, rel_tol=1e-12):
        raise MixedWidths(
            f"phase-space distance needs equal widths, got {p1.sigma_x:g} and {p2.sigma_x:g}"
        )
    sigma = p1.sigma_x
    dk = p1.k0 - p2.k0
    dx = p1.x0 - p2.x0
    return math.sqrt(dk * dk * sigma * sigma / 2.0 + dx * dx / (2.0 * sigma * sigma))


def packet_triple(
    distance: float,
    x_center: float,
    k_center: float,
    sigma_x: float,
    units: UnitSystem = FREE_ELECTRON,
) -> list[GaussianPacketSpec]:
    """Three packets with d(1,2) = d(1,3) = ``distance``.

    Packets 2 and 3 sit symmetrically in position about packet 1 and share a wave vector
    shifted by ``distance/σ``.
    """
    dx = distance * sigma_x
    dk = distance / sigma_x
    return [
        GaussianPacketSpec(x_center, k_center, sigma_x, units),
        GaussianPacketSpec(x_center - dx, k_center + dk, sigma_x, units),
        GaussianPacketSpec(x_center + dx, k_center + dk, sigma_x, units),
    ]
