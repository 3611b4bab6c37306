"""Two-particle Bohmian trajectories guided by the full configuration-space field."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from bohmex.bohm.trajectory import TrajectoryEnsemble, heun_position
from bohmex.bohm.velocity import STENCIL_OFFSETS, Guidance, local_guidance
from bohmex.grid import WaveField2D
from bohmex.packets import Species
from bohmex.tdse.potentials import Potential2D
from bohmex.tdse.propagator import PropagatorConfig, step_2d

logger = logging.getLogger(__name__)


def guidance_2d(psi: WaveField2D, X: np.ndarray, cfg: PropagatorConfig) -> Guidance:
    """Velocity and Q of both particles at configurations ``X[M, 2]``."""
    g1, g2 = psi.grid_x1, psi.grid_x2
    amp = psi.amplitudes
    peak = np.abs(amp).max()
    i1, f1 = g1.locate(X[:, 0])
    i2, f2 = g2.locate(X[:, 1])

    w1, w2 = f1[:, None], f2[:, None]
    rows = np.clip(i1[:, None] + STENCIL_OFFSETS, 0, g1.n_points - 1)
    along1 = (1.0 - w2) * amp[rows, i2[:, None]] + w2 * amp[rows, i2[:, None] + 1]
    cols = np.clip(i2[:, None] + STENCIL_OFFSETS, 0, g2.n_points - 1)
    along2 = (1.0 - w1) * amp[i1[:, None], cols] + w1 * amp[i1[:, None] + 1, cols]

    first = local_guidance(along1, f1, g1.dx, cfg.units, peak)
    second = local_guidance(along2, f2, g2.dx, cfg.units, peak)
    return Guidance(
        velocity=np.column_stack([first.velocity, second.velocity]),
        quantum=np.column_stack([first.quantum, second.quantum]),
        modulus=np.column_stack([first.modulus, second.modulus]),
        node=np.column_stack([first.node, second.node]),
    )


def _clamp(psi: WaveField2D, X: np.ndarray) -> np.ndarray:
    return np.column_stack([psi.grid_x1.clamp(X[:, 0]), psi.grid_x2.clamp(X[:, 1])])


def evolve_exact_2d(
    psi: WaveField2D,
    potential: Potential2D,
    cfg: PropagatorConfig,
    initial: np.ndarray,
    n_steps: int,
    record_every: int = 1,
    on_record: Callable[[WaveField2D], None] | None = None,
) -> tuple[WaveField2D, TrajectoryEnsemble]:
    """Propagate Ψ(x₁, x₂) and M trajectory pairs in lockstep.

    Each step evaluates v(t) at X(t), predicts X + dt·v, advances the field, evaluates
    v(t + dt) at the prediction and applies the Heun average.
    """
    X = np.array(initial, dtype=float)
    v_cap = np.array([psi.grid_x1.dx, psi.grid_x2.dx]) / cfg.dt
    times, positions, velocities, quantum, nodes = [], [], [], [], []

    def record(state: WaveField2D, guide: Guidance) -> None:
        times.append(state.time)
        positions.append(X.copy())
        velocities.append(np.clip(guide.velocity, -v_cap, v_cap))
        quantum.append(np.where(guide.node, np.nan, guide.quantum))
        nodes.append(guide.node)
        if on_record is not None:
            on_record(state)

    for step in range(n_steps):
        guide = guidance_2d(psi, X, cfg)
        if step % record_every == 0:
            record(psi, guide)
        v0 = np.clip(guide.velocity, -v_cap, v_cap)
        predicted = _clamp(psi, X + cfg.dt * v0)
        psi = step_2d(psi, potential, cfg)
        v1 = np.clip(guidance_2d(psi, predicted, cfg).velocity, -v_cap, v_cap)
        X = _clamp(psi, heun_position(X, v0, v1, cfg.dt))
    record(psi, guidance_2d(psi, X, cfg))
    logger.info("exact 2D run: %d steps, %d trajectory pairs", n_steps, X.shape[0])

    ensemble = TrajectoryEnsemble(
        times=np.array(times),
        positions=np.stack(positions),
        velocities=np.stack(velocities),
        quantum=np.stack(quantum),
        node=np.stack(nodes),
        species=psi.species or Species.DISTINGUISHABLE,
    )
    return psi, ensemble
