"""Physical constants and the (eV, nm, fs) unit system."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

HBAR_EV_FS = 0.6582119569
HBAR_C_EV_NM = 197.3269804
ELECTRON_REST_ENERGY_EV = 510998.95
HBAR2_OVER_M0 = HBAR_C_EV_NM**2 / ELECTRON_REST_ENERGY_EV
COULOMB_EV_NM = 1.439964548
BOLTZMANN_EV_K = 8.617333262e-5
ELEMENTARY_CHARGE_C = 1.602176634e-19
GAAS_MASS_RATIO = 0.067


@dataclass(frozen=True)
class UnitSystem:
    """ħ and particle mass in eV·fs / eV·nm² units.

    ``mass_free`` stores the free-electron mass as ħ²/m₀, so every kinetic prefactor is a
    plain division by ``mass_eff_ratio``.
    """

    hbar: float = HBAR_EV_FS
    mass_free: float = HBAR2_OVER_M0
    mass_eff_ratio: float = 1.0

    def __post_init__(self) -> None:
        if self.hbar <= 0 or self.mass_free <= 0 or self.mass_eff_ratio <= 0:
            raise ValueError("hbar and mass quantities must be positive")

    @property
    def hbar2_over_m(self) -> float:
        """ħ²/m in eV·nm²."""
        return self.mass_free / self.mass_eff_ratio

    @property
    def hbar_over_m(self) -> float:
        """ħ/m in nm²/fs."""
        return self.hbar2_over_m / self.hbar

    @property
    def mass(self) -> float:
        """m in eV·fs²/nm²."""
        return self.hbar**2 / self.hbar2_over_m

    def wave_vector(self, energy: float) -> float:
        """Wave vector (nm⁻¹) of a free particle with kinetic energy ``energy`` (eV)."""
        if energy < 0:
            raise ValueError(f"energy must be non-negative, got {energy}")
        return math.sqrt(2.0 * energy / self.hbar2_over_m)

    def energy(self, k: float) -> float:
        """Kinetic energy (eV) of wave vector ``k``."""
        return 0.5 * self.hbar2_over_m * k * k

    def velocity(self, k: float) -> float:
        """Group velocity (nm/fs) of wave vector ``k``."""
        return self.hbar_over_m * k

    def with_mass_ratio(self, ratio: float) -> UnitSystem:
        return replace(self, mass_eff_ratio=ratio)


FREE_ELECTRON = UnitSystem()
GAAS_ELECTRON = UnitSystem(mass_eff_ratio=GAAS_MASS_RATIO)
