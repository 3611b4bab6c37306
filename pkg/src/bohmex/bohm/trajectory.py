"""Bohmian trajectories, trajectory ensembles and Heun integration."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from bohmex.errors import LeftDomain
from bohmex.grid import Grid1D
from bohmex.packets import Species

VelocityFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass
class Trajectory:
    id: int
    particle_index: int
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def position(self) -> float:
        return float(self.positions[-1])

    @property
    def time(self) -> float:
        return float(self.times[-1])


@dataclass
class TrajectoryEnsemble:
    """M many-particle trajectories sampled on a shared time grid.

    Arrays are indexed (time, member, particle). ``quantum`` holds Q at each sample
    (NaN where the sample sat in a node region) and ``node`` flags those samples.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    quantum: np.ndarray
    node: np.ndarray
    species: Species
    seeds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        if self.positions.ndim != 3:
            raise ValueError("ensemble arrays must be shaped (time, member, particle)")
        if self.positions.shape[1] < 1:
            raise ValueError("an ensemble needs at least one member")

    @property
    def n_members(self) -> int:
        return self.positions.shape[1]

    @property
    def n_particles(self) -> int:
        return self.positions.shape[2]

    def trajectory(self, member: int, particle: int) -> Trajectory:
        seed = int(self.seeds[member]) if self.seeds.size else None
        return Trajectory(
            id=member,
            particle_index=particle,
            times=self.times,
            positions=self.positions[:, member, particle],
            velocities=self.velocities[:, member, particle],
            seed=seed,
        )

    def diagonal_sign_changes(self, a: int = 0, b: int = 1) -> int:
        """Members whose x_a - x_b changes sign at some recorded time."""
        gap = np.sign(self.positions[:, :, a] - self.positions[:, :, b])
        return int(np.count_nonzero(np.any(gap != gap[0], axis=0)))

    def min_gap(self, a: int = 0, b: int = 1) -> float:
        return float(np.abs(self.positions[:, :, a] - self.positions[:, :, b]).min())

    @classmethod
    def concatenate(cls, parts: Sequence[TrajectoryEnsemble]) -> TrajectoryEnsemble:
        first = parts[0]
        return replace(
            first,
            positions=np.concatenate([p.positions for p in parts], axis=1),
            velocities=np.concatenate([p.velocities for p in parts], axis=1),
            quantum=np.concatenate([p.quantum for p in parts], axis=1),
            node=np.concatenate([p.node for p in parts], axis=1),
            seeds=np.concatenate([p.seeds for p in parts]),
        )


def cap_velocity(v: np.ndarray, v_cap: float | None) -> np.ndarray:
    if v_cap is None:
        return v
    return np.clip(v, -v_cap, v_cap)


def heun_position(x: np.ndarray, v0: np.ndarray, v1: np.ndarray, dt: float) -> np.ndarray:
    return x + 0.5 * dt * (v0 + v1)


def advance_trajectory(
    traj: Trajectory,
    v_at: VelocityFn,
    dt: float,
    grid: Grid1D | None = None,
    clamp: bool = True,
) -> Trajectory:
    """Append one Heun step to ``traj``.

    With a grid, velocities are capped at dx/dt and the new position is clamped into
    the grid; with ``clamp=False`` leaving the grid raises LeftDomain instead.
    """
    v_cap = grid.dx / dt if grid is not None else None
    x, t = traj.position, traj.time
    v0 = float(cap_velocity(np.asarray(v_at(np.asarray(x), t)), v_cap))
    predicted = x + dt * v0
    if grid is not None:
        predicted = float(grid.clamp(np.asarray(predicted)))
    v1 = float(cap_velocity(np.asarray(v_at(np.asarray(predicted), t + dt)), v_cap))
    x_new = float(heun_position(np.asarray(x), np.asarray(v0), np.asarray(v1), dt))
    if grid is not None and not grid.contains(x_new):
        if not clamp:
            raise LeftDomain(x_new, grid.x_min, grid.x_max)
        x_new = float(grid.clamp(np.asarray(x_new)))
    velocities = traj.velocities.copy()
    velocities[-1] = v0
    return replace(
        traj,
        times=np.append(traj.times, t + dt),
        positions=np.append(traj.positions, x_new),
        velocities=np.append(velocities, v1),
    )
