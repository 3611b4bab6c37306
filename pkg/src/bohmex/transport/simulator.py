"""Transport Monte Carlo: injection, conditional-set dynamics and exit bookkeeping."""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from bohmex.errors import PopulationOverflow
from bohmex.exchange.conditional import (
    ConditionalSet,
    ConditionalStepper,
    add_particle,
    init_conditional_set,
    remove_particle,
)
from bohmex.exchange.spin import SpinChannelSystem, step_spin_channels
from bohmex.packets import Species
from bohmex.transport.device import Contact, DeviceConfig, Interaction, Spin, TransportSettings
from bohmex.transport.injection import Injection, SpinAlternator, build_cells, injection_attempts
from bohmex.transport.records import (
    CurrentRecord,
    DwellStatistics,
    FlightRecord,
    dwell_statistics,
)

logger = logging.getLogger(__name__)

REMOVAL_SIGMAS = 4.0


@dataclass
class Electron:
    id: int
    contact: Contact
    spin: Spin
    flight: FlightRecord | None = None


@dataclass
class TransportResult:
    interaction: Interaction
    bias: float
    current: CurrentRecord
    flights: list[FlightRecord] = field(default_factory=list)
    injected: int = 0
    removed: int = 0
    in_flight: int = 0
    mean_population: float = 0.0
    peak_population: int = 0
    mean_fields: float = 0.0

    @property
    def dwell(self) -> DwellStatistics:
        return dwell_statistics(self.flights)

    def summary_row(self) -> dict[str, object]:
        return {
            "bias_V": self.bias,
            "interaction": str(self.interaction),
            "mean_current_e_per_fs": self.current.mean_current,
            "injected": self.injected,
            "removed": self.removed,
            "in_flight": self.in_flight,
            "mean_population": self.mean_population,
            "peak_population": self.peak_population,
            "mean_fields": self.mean_fields,
        }


class TransportSimulation:
    """Event loop of one device at one bias under one interaction flag."""

    def __init__(
        self,
        device: DeviceConfig,
        interaction: Interaction,
        settings: TransportSettings,
        seed: int,
    ) -> None:
        self.device = device
        self.interaction = interaction
        self.settings = settings
        self._rng = np.random.default_rng(seed)
        self._grid = device.grid(settings.dx)
        self._cfg = settings.propagator(device)
        softening = settings.softening_cells * settings.dx
        self._stepper = ConditionalStepper(device.potential(interaction, softening), self._cfg)
        self._species = Species.FERMION if interaction.exchange else Species.DISTINGUISHABLE
        self._cells = build_cells(device, settings.n_cells, self._rng)
        self._spins = SpinAlternator()
        self._system = SpinChannelSystem(None, None, coulomb=interaction.coulomb)
        self._electrons: dict[Spin, list[Electron]] = {spin: [] for spin in Spin}
        self._flights: list[FlightRecord] = []
        self._next_id = 0
        self._injected = 0
        self._removed = 0

    @property
    def population(self) -> int:
        return self._system.n_particles

    @property
    def field_count(self) -> int:
        """Stored conditional fields, n² for each spin channel of n electrons."""
        return sum(c.n_particles**2 for c in self._system.channels())

    def _channel(self, spin: Spin) -> ConditionalSet | None:
        return getattr(self._system, spin.value)

    def _set_channel(self, spin: Spin, cset: ConditionalSet | None) -> None:
        self._system = replace(self._system, **{spin.value: cset})

    def _inject(self, injection: Injection) -> None:
        cset = self._channel(injection.spin)
        if cset is None:
            cset = init_conditional_set(
                [injection.spec],
                self._species,
                self._grid,
                initial_positions=np.array([[injection.position]]),
            )
        else:
            cset = add_particle(cset, injection.spec, injection.position)
        self._set_channel(injection.spin, cset)
        self._electrons[injection.spin].append(
            Electron(self._next_id, injection.contact, injection.spin)
        )
        self._next_id += 1
        self._injected += 1
        if self.population > self.settings.population_cap:
            raise PopulationOverflow(self.population, self.settings.population_cap)

    def _far_outside(self, electron: Electron, x: float) -> bool:
        reach = self.device.x0_offset + REMOVAL_SIGMAS * self.device.sigma_x
        if electron.contact is Contact.SOURCE:
            return x < -reach
        return x > self.device.l_active + reach

    def _bookkeep(
        self, spin: Spin, old: np.ndarray, new: np.ndarray, time: float, current: CurrentRecord
    ) -> None:
        """Record drain crossings, open and close flights, drop departed electrons."""
        length = self.device.l_active
        departed = []
        for j, electron in enumerate(self._electrons[spin]):
            before, after = float(old[j]), float(new[j])
            if before < length <= after:
                current.add_crossing(time, +1)
            elif after < length <= before:
                current.add_crossing(time, -1)

            inside = 0.0 <= after <= length
            if electron.flight is None:
                if inside:
                    side = Contact.SOURCE if before < 0.0 else Contact.DRAIN
                    electron.flight = FlightRecord(electron.id, time, side, spin)
                    self._flights.append(electron.flight)
                elif self._far_outside(electron, after):
                    departed.append(j)
            elif not inside:
                electron.flight.close(time, Contact.SOURCE if after < 0.0 else Contact.DRAIN)
                departed.append(j)

        cset = self._channel(spin)
        for j in reversed(departed):
            del self._electrons[spin][j]
            cset = remove_particle(cset, j)
            self._removed += 1
        if departed:
            logger.debug("%d %s electrons left at t=%.1f fs", len(departed), spin, time)
            self._set_channel(spin, cset if cset.n_particles else None)

    def run(
        self, t_total: float, on_progress: Callable[[float, int], None] | None = None
    ) -> TransportResult:
        dt = self._cfg.dt
        current = CurrentRecord(t_total, self.settings.current_bin)
        n_steps = round(t_total / dt)
        population_sum = field_sum = peak = 0
        for step in range(n_steps):
            t = step * dt
            for cell in self._cells:
                for injection in injection_attempts(
                    cell, (t, t + dt), self._rng, self.device, self._spins
                ):
                    self._inject(injection)

            old = {spin: self._channel(spin) for spin in Spin}
            _, self._system = step_spin_channels(self._system, self._stepper)
            for spin in Spin:
                if old[spin] is None:
                    continue
                self._bookkeep(
                    spin,
                    old[spin].positions[0],
                    self._channel(spin).positions[0],
                    t + dt,
                    current,
                )
            population_sum += self.population
            field_sum += self.field_count
            peak = max(peak, self.population)
            if on_progress is not None:
                on_progress(t + dt, self.population)

        result = TransportResult(
            interaction=self.interaction,
            bias=self.device.bias,
            current=current,
            flights=self._flights,
            injected=self._injected,
            removed=self._removed,
            in_flight=self.population,
            mean_population=population_sum / max(n_steps, 1),
            peak_population=peak,
            mean_fields=field_sum / max(n_steps, 1),
        )
        logger.info(
            "transport %s at %.3f V: <I>=%.4e e/fs, %d injected, %d in flight",
            self.interaction,
            self.device.bias,
            current.mean_current,
            self._injected,
            self.population,
        )
        return result


def run_transport(
    device: DeviceConfig,
    interaction: Interaction,
    t_total: float,
    seed: int,
    settings: TransportSettings | None = None,
) -> TransportResult:
    """Simulate ``t_total`` fs of transport; identical seeds reproduce identical records."""
    simulation = TransportSimulation(device, interaction, settings or TransportSettings(), seed)
    return simulation.run(t_total)


async def sweep_transport(
    device: DeviceConfig,
    interactions: Sequence[Interaction],
    biases: Sequence[float],
    t_total: float,
    seed: int,
    settings: TransportSettings | None = None,
) -> list[TransportResult]:
    """Run every (bias, interaction) point; points share ``seed`` so that flags are compared
    on the same injection sequence."""
    settings = settings or TransportSettings()
    jobs = [
        partial(run_transport, replace(device, bias=bias), interaction, t_total, seed, settings)
        for bias in biases
        for interaction in interactions
    ]
    if settings.workers == 1:
        return [job() for job in jobs]

    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=settings.workers) as pool:
        tasks = [loop.run_in_executor(pool, job) for job in jobs]
        results = await asyncio.gather(*tasks, return_exceptions=True)

    failures = [r for r in results if isinstance(r, BaseException)]
    for failure in failures:
        logger.error("transport point failed: %s", failure)
    if failures:
        raise failures[0]
    return list(results)


def run_sweep(
    device: DeviceConfig,
    interactions: Sequence[Interaction],
    biases: Sequence[float],
    t_total: float,
    seed: int,
    settings: TransportSettings | None = None,
) -> list[TransportResult]:
    return asyncio.run(sweep_transport(device, interactions, biases, t_total, seed, settings))
