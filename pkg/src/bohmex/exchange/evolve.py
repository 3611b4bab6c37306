"""Time evolution of conditional sets and the particle-interchange check."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from bohmex.bohm.trajectory import TrajectoryEnsemble
from bohmex.bohm.velocity import Guidance
from bohmex.exchange.conditional import ConditionalSet, ConditionalStepper, guidance
from bohmex.packets import Species
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import PropagatorConfig

logger = logging.getLogger(__name__)

SWAP_TOLERANCE = 1e-6


class TrajectoryRecorder:
    """Accumulates guidance samples into a TrajectoryEnsemble."""

    def __init__(self, species: Species, seeds: np.ndarray) -> None:
        self._species = species
        self._seeds = seeds
        self._times: list[float] = []
        self._positions: list[np.ndarray] = []
        self._velocities: list[np.ndarray] = []
        self._quantum: list[np.ndarray] = []
        self._node: list[np.ndarray] = []

    def add(self, time: float, positions: np.ndarray, guide: Guidance) -> None:
        self._times.append(time)
        self._positions.append(positions.copy())
        self._velocities.append(guide.velocity)
        self._quantum.append(np.where(guide.node, np.nan, guide.quantum))
        self._node.append(guide.node)

    def ensemble(self) -> TrajectoryEnsemble:
        return TrajectoryEnsemble(
            times=np.array(self._times),
            positions=np.stack(self._positions),
            velocities=np.stack(self._velocities),
            quantum=np.stack(self._quantum),
            node=np.stack(self._node),
            species=self._species,
            seeds=self._seeds,
        )


def evolve_system(
    cset: ConditionalSet,
    potential: Potential1D,
    cfg: PropagatorConfig,
    n_steps: int,
    record_every: int = 1,
    on_record: Callable[[ConditionalSet], None] | None = None,
) -> tuple[ConditionalSet, TrajectoryEnsemble]:
    """Run ``n_steps`` lockstep steps of trajectories and the N² conditional fields.

    Every ``record_every`` steps the positions, velocities and quantum potentials at the
    step start are stored; the final state is always recorded.
    """
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    stepper = ConditionalStepper(potential, cfg)
    recorder = TrajectoryRecorder(cset.species, cset.seeds)
    node_total = 0
    for step in range(n_steps):
        start, advanced = stepper.step(cset)
        if step % record_every == 0:
            recorder.add(cset.time, cset.positions, start)
            if on_record is not None:
                on_record(cset)
        node_total += int(start.node.sum())
        cset = advanced
    final = guidance(cset, cfg)
    final.velocity = np.clip(final.velocity, -cset.grid.dx / cfg.dt, cset.grid.dx / cfg.dt)
    recorder.add(cset.time, cset.positions, final)
    if on_record is not None:
        on_record(cset)
    if node_total:
        logger.debug("%d trajectory samples met node regions", node_total)
    logger.info(
        "evolved %s set: N=%d, M=%d, %d steps",
        cset.species,
        cset.n_particles,
        cset.n_members,
        n_steps,
    )
    return cset, recorder.ensemble()


class SwapStatus(StrEnum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class SwapReport:
    status: SwapStatus
    max_deviation: float
    pair: tuple[int, int]
    tolerance: float = SWAP_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.status is not SwapStatus.FAIL


def swap_deviation(reference: np.ndarray, mirrored: np.ndarray) -> float:
    """Max-norm difference relative to the max norm of ``reference``; absolute if that is 0."""
    scale = float(np.abs(reference).max())
    difference = float(np.abs(reference - mirrored).max())
    return difference / scale if scale > 0 else difference


def swap_symmetry_check(
    builder: Callable[[np.ndarray], ConditionalSet],
    positions: np.ndarray,
    potential: Potential1D,
    cfg: PropagatorConfig,
    n_steps: int,
    pair: tuple[int, int] = (0, 1),
    tolerance: float = SWAP_TOLERANCE,
) -> SwapReport:
    """Evolve from X and from X with particles j and h interchanged.

    For identical particles r_j(t) of the first run must equal r_h(t) of the second and
    vice versa. The deviation is measured by :func:`swap_deviation`.
    """
    j, h = pair
    original = np.atleast_2d(np.asarray(positions, dtype=float))
    swapped = original.copy()
    swapped[:, [j, h]] = original[:, [h, j]]

    first = builder(original)
    if not first.species.identical:
        return SwapReport(SwapStatus.NOT_APPLICABLE, 0.0, pair, tolerance)
    _, ens_l = evolve_system(first, potential, cfg, n_steps)
    _, ens_f = evolve_system(builder(swapped), potential, cfg, n_steps)

    mirrored = ens_f.positions.copy()
    mirrored[:, :, [j, h]] = ens_f.positions[:, :, [h, j]]
    deviation = swap_deviation(ens_l.positions, mirrored)
    status = SwapStatus.PASS if deviation <= tolerance else SwapStatus.FAIL
    logger.info("swap check %s for pair %s: max deviation %.3e", status, pair, deviation)
    return SwapReport(status, deviation, pair, tolerance)
