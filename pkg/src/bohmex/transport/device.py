"""Two-terminal 1D channel: geometry, contact statistics and interaction flags."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.special import expit

from bohmex.grid import Grid1D
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import Boundary, PropagatorConfig
from bohmex.units import BOLTZMANN_EV_K, FREE_ELECTRON, GAAS_MASS_RATIO, UnitSystem


class Contact(StrEnum):
    SOURCE = "S"
    DRAIN = "D"


class Spin(StrEnum):
    UP = "up"
    DOWN = "down"


class Interaction(StrEnum):
    """Interaction flags: none, Coulomb only, exchange only, Coulomb plus exchange."""

    WI = "WI"
    CI = "CI"
    EI = "EI"
    CEI = "CEI"

    @property
    def coulomb(self) -> bool:
        return self in (Interaction.CI, Interaction.CEI)

    @property
    def exchange(self) -> bool:
        return self in (Interaction.EI, Interaction.CEI)


@dataclass(frozen=True)
class DeviceConfig:
    """Active region [0, l_active] between source (x < 0) and drain (x > l_active).

    Lengths in nm, energies in eV, bias in V. The bias drops linearly across the active
    region only.
    """

    l_active: float = 30.0
    contact_extension: float = 300.0
    fermi_level: float = 0.15
    subband_offset: float = 0.13
    temperature: float = 300.0
    mass_eff_ratio: float = GAAS_MASS_RATIO
    bias: float = 0.0
    epsilon_r: float = 12.9
    sigma_x: float = 25.0
    x0_offset: float = 100.0

    def __post_init__(self) -> None:
        positive = {
            "l_active": self.l_active,
            "contact_extension": self.contact_extension,
            "fermi_level": self.fermi_level,
            "subband_offset": self.subband_offset,
            "temperature": self.temperature,
            "mass_eff_ratio": self.mass_eff_ratio,
            "epsilon_r": self.epsilon_r,
            "sigma_x": self.sigma_x,
            "x0_offset": self.x0_offset,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"device {name} must be positive, got {value}")
        if self.bias < 0:
            raise ValueError(f"bias must be non-negative, got {self.bias}")
        if self.contact_extension < 200.0:
            raise ValueError("contact_extension must be at least 200 nm")

    @property
    def units(self) -> UnitSystem:
        return FREE_ELECTRON.with_mass_ratio(self.mass_eff_ratio)

    @property
    def thermal_energy(self) -> float:
        return BOLTZMANN_EV_K * self.temperature

    def occupation(self, kinetic_energy: float | np.ndarray) -> float | np.ndarray:
        """Fermi–Dirac occupation of a state of longitudinal energy E above the subband."""
        excess = self.subband_offset + np.asarray(kinetic_energy) - self.fermi_level
        return expit(-excess / self.thermal_energy)

    def k_max(self, threshold: float = 1e-6) -> float:
        """Wave vector above which the occupation falls below ``threshold``."""
        excess = self.thermal_energy * math.log(1.0 / threshold - 1.0)
        energy = max(self.fermi_level - self.subband_offset + excess, 0.0)
        return self.units.wave_vector(energy)

    def grid(self, dx: float) -> Grid1D:
        lo = -self.contact_extension
        hi = self.l_active + self.contact_extension
        return Grid1D(lo, hi, round((hi - lo) / dx) + 1)

    def injection_x0(self, contact: Contact) -> float:
        if contact is Contact.SOURCE:
            return -self.x0_offset
        return self.l_active + self.x0_offset

    @staticmethod
    def direction(contact: Contact) -> int:
        return 1 if contact is Contact.SOURCE else -1

    def inside(self, x: np.ndarray) -> np.ndarray:
        return (x >= 0.0) & (x <= self.l_active)

    def potential(self, interaction: Interaction, softening: float) -> Potential1D:
        """Bias ramp, plus softened pairwise Coulomb for CI and CEI."""
        parts = [Potential1D.linear_ramp(self.bias, self.l_active)]
        if interaction.coulomb:
            parts.append(Potential1D.coulomb_soft(softening, self.epsilon_r))
        return Potential1D.sum(*parts)


@dataclass(frozen=True)
class TransportSettings:
    """Numerical settings of a transport run (nm, fs)."""

    dx: float = 0.4
    dt: float = 0.2
    n_cells: int = 32
    population_cap: int = 32
    current_bin: float = 1.0
    cap_strength: float = 0.05
    cap_width: float = 40.0
    softening_cells: float = 2.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.dx <= 0 or self.dt <= 0 or self.current_bin <= 0:
            raise ValueError("dx, dt and current_bin must be positive")
        if self.n_cells < 1 or self.population_cap < 1 or self.workers < 1:
            raise ValueError("n_cells, population_cap and workers must be at least 1")

    def propagator(self, device: DeviceConfig) -> PropagatorConfig:
        return PropagatorConfig(
            dt=self.dt,
            boundary=Boundary.CAP,
            cap_strength=self.cap_strength,
            cap_width=self.cap_width,
            units=device.units,
        )
