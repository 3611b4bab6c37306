"""Contact injection: k-space cells, attempt clocks and binomial acceptance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bohmex.packets import GaussianPacketSpec
from bohmex.transport.device import Contact, DeviceConfig, Spin


@dataclass
class InjectionCell:
    """One k-space cell of a contact.

    Attempts are spaced exactly ``t0`` apart starting at ``phase``; each is accepted with
    probability ``fermi_occupation``.
    """

    contact: Contact
    index: int
    k_lo: float
    k_hi: float
    t0: float
    fermi_occupation: float
    phase: float = 0.0
    attempts: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.fermi_occupation <= 1.0:
            raise ValueError(f"occupation must lie in [0, 1], got {self.fermi_occupation}")
        if self.t0 <= 0:
            raise ValueError("attempt period t0 must be positive")

    @property
    def k_center(self) -> float:
        return 0.5 * (self.k_lo + self.k_hi)

    @property
    def next_attempt_time(self) -> float:
        return self.phase + self.attempts * self.t0


@dataclass(frozen=True)
class Injection:
    time: float
    contact: Contact
    cell: int
    spec: GaussianPacketSpec
    position: float
    spin: Spin


class SpinAlternator:
    """Assigns spins round-robin, with an independent rotation per contact."""

    def __init__(self, spins: list[Spin] | None = None) -> None:
        self._spins = list(spins or (Spin.UP, Spin.DOWN))
        self._index = {contact: 0 for contact in Contact}

    def next_spin(self, contact: Contact) -> Spin:
        spin = self._spins[self._index[contact] % len(self._spins)]
        self._index[contact] += 1
        return spin

    @property
    def pool_size(self) -> int:
        return len(self._spins)


def attempt_period(k_center: float, dk: float, device: DeviceConfig) -> float:
    """Minimum separation t0 = π / (v(k₀)·Δk) between packets of one cell."""
    return math.pi / (device.units.velocity(k_center) * dk)


def build_cells(
    device: DeviceConfig, n_cells: int, rng: np.random.Generator
) -> list[InjectionCell]:
    """Uniform cells over [0, k_max] for both contacts with random clock phases."""
    k_max = device.k_max()
    dk = k_max / n_cells
    cells = []
    for contact in Contact:
        for i in range(n_cells):
            k_lo, k_hi = i * dk, (i + 1) * dk
            k_center = 0.5 * (k_lo + k_hi)
            t0 = attempt_period(k_center, dk, device)
            occupation = float(device.occupation(device.units.energy(k_center)))
            cells.append(
                InjectionCell(
                    contact=contact,
                    index=i,
                    k_lo=k_lo,
                    k_hi=k_hi,
                    t0=t0,
                    fermi_occupation=occupation,
                    phase=float(rng.uniform(0.0, t0)),
                )
            )
    return cells


def injection_attempts(
    cell: InjectionCell,
    window: tuple[float, float],
    rng: np.random.Generator,
    device: DeviceConfig,
    spins: SpinAlternator | None = None,
) -> list[Injection]:
    """Run every attempt of ``cell`` falling in [t_start, t_end) and return the accepted ones.

    An accepted attempt becomes a packet at the contact offset moving into the device,
    with a start position drawn from its |ψ|².
    """
    t_start, t_end = window
    spins = spins or SpinAlternator()
    direction = DeviceConfig.direction(cell.contact)
    x0 = device.injection_x0(cell.contact)
    injections = []
    while cell.next_attempt_time < t_end:
        time = cell.next_attempt_time
        cell.attempts += 1
        if time < t_start or rng.random() >= cell.fermi_occupation:
            continue
        spec = GaussianPacketSpec(x0, direction * cell.k_center, device.sigma_x, device.units)
        position = float(rng.normal(x0, device.sigma_x / math.sqrt(2.0)))
        injections.append(
            Injection(time, cell.contact, cell.index, spec, position, spins.next_spin(cell.contact))
        )
    return injections


def injection_times(cell: InjectionCell, t_end: float, rng: np.random.Generator) -> np.ndarray:
    """Accepted attempt times of ``cell`` over [0, t_end), without any dynamics."""
    n = max(0, math.ceil((t_end - cell.phase) / cell.t0))
    times = cell.phase + cell.t0 * np.arange(n)
    times = times[times < t_end]
    return times[rng.random(times.size) < cell.fermi_occupation]
