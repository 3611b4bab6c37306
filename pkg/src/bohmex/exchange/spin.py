"""Spin-factorized systems: one exchange channel per spin orientation."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from bohmex.analytic import spin_mixed_norm_check
from bohmex.bohm.trajectory import TrajectoryEnsemble
from bohmex.bohm.velocity import Guidance
from bohmex.exchange.conditional import ConditionalSet, ConditionalStepper, guidance
from bohmex.exchange.evolve import TrajectoryRecorder
from bohmex.packets import GaussianPacketSpec
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import PropagatorConfig

logger = logging.getLogger(__name__)


@dataclass
class SpinChannelSystem:
    """Spin-up and spin-down conditional sets; either channel may be empty (None).

    With ``coulomb`` set, the pair potential of every channel also sums over the
    trajectories of the opposite spin.
    """

    up: ConditionalSet | None
    down: ConditionalSet | None
    coulomb: bool = False

    def channels(self) -> list[ConditionalSet]:
        return [c for c in (self.up, self.down) if c is not None and c.n_particles > 0]

    @property
    def n_particles(self) -> int:
        return sum(c.n_particles for c in self.channels())


@dataclass
class SpinRecords:
    up: TrajectoryEnsemble | None
    down: TrajectoryEnsemble | None


def _opposite(system: SpinChannelSystem, cset: ConditionalSet | None) -> np.ndarray | None:
    if not system.coulomb or cset is None:
        return None
    other = system.down if cset is system.up else system.up
    if other is None or other.n_particles == 0:
        return None
    return other.positions


def step_spin_channels(
    system: SpinChannelSystem, stepper: ConditionalStepper
) -> tuple[dict[str, Guidance], SpinChannelSystem]:
    """One lockstep step of both channels from the same step-start configuration."""
    starts: dict[str, Guidance] = {}
    advanced: dict[str, ConditionalSet | None] = {"up": system.up, "down": system.down}
    for name in ("up", "down"):
        cset = getattr(system, name)
        if cset is None or cset.n_particles == 0:
            continue
        start, advanced[name] = stepper.step(cset, _opposite(system, cset))
        starts[name] = start
    return starts, SpinChannelSystem(advanced["up"], advanced["down"], system.coulomb)


def evolve_spin_channels(
    system: SpinChannelSystem,
    potential: Potential1D,
    cfg: PropagatorConfig,
    n_steps: int,
    record_every: int = 1,
) -> tuple[SpinChannelSystem, SpinRecords]:
    """Evolve both channels with exchange restricted to each channel."""
    stepper = ConditionalStepper(potential, cfg)
    recorders = {
        name: TrajectoryRecorder(cset.species, cset.seeds)
        for name, cset in (("up", system.up), ("down", system.down))
        if cset is not None and cset.n_particles > 0
    }
    for step in range(n_steps):
        starts, advanced = step_spin_channels(system, stepper)
        if step % record_every == 0:
            for name, start in starts.items():
                cset = getattr(system, name)
                recorders[name].add(cset.time, cset.positions, start)
        system = advanced
    for name, recorder in recorders.items():
        cset = getattr(system, name)
        final = guidance(cset, cfg)
        v_cap = cset.grid.dx / cfg.dt
        final.velocity = np.clip(final.velocity, -v_cap, v_cap)
        recorder.add(cset.time, cset.positions, final)
    logger.info(
        "evolved spin channels: %d particles, coulomb=%s, %d steps",
        system.n_particles,
        system.coulomb,
        n_steps,
    )
    records = SpinRecords(
        up=recorders["up"].ensemble() if "up" in recorders else None,
        down=recorders["down"].ensemble() if "down" in recorders else None,
    )
    return system, records


def spin_factorization_error(
    packets: Sequence[GaussianPacketSpec], configurations: np.ndarray
) -> float:
    """Largest deviation between the spin-factorized and fully antisymmetrized (↑,↓,↓)
    densities over ``configurations[M, 3]``, relative to the largest exact density."""
    exact, approx = np.array(
        [spin_mixed_norm_check(packets, row) for row in np.asarray(configurations)]
    ).T
    peak = exact.max()
    if peak <= 0:
        raise ValueError("exact density vanishes at every configuration")
    return float(np.abs(exact - approx).max() / peak)
