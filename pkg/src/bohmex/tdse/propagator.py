"""Crank–Nicolson propagation in 1D and alternating-direction Cayley sweeps in 2D."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import StrEnum
from functools import lru_cache

import numpy as np

from bohmex.errors import NonFiniteAmplitude
from bohmex.grid import Grid1D, WaveField1D, WaveField2D
from bohmex.packets import Species
from bohmex.tdse.potentials import Potential1D, Potential2D
from bohmex.tdse.tridiagonal import apply_tridiagonal, solve_tridiagonal
from bohmex.units import FREE_ELECTRON, UnitSystem

CAP_MIN_CELLS = 10


class Boundary(StrEnum):
    HARD = "hard"
    CAP = "cap"


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float
    boundary: Boundary = Boundary.HARD
    cap_strength: float = 0.05
    cap_width: float = 100.0
    units: UnitSystem = field(default=FREE_ELECTRON)
    method: str = "crank-nicolson"

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.method != "crank-nicolson":
            raise ValueError(f"unsupported propagation method: {self.method}")
        if self.boundary is Boundary.CAP and (self.cap_strength <= 0 or self.cap_width <= 0):
            raise ValueError("CAP strength and width must be positive")

    def with_units(self, units: UnitSystem) -> PropagatorConfig:
        return replace(self, units=units)


@lru_cache(maxsize=32)
def cap_profile(grid: Grid1D, cfg: PropagatorConfig) -> np.ndarray:
    """Quadratic absorbing strength W(x) (eV) rising over ``cap_width`` toward each edge."""
    if cfg.boundary is Boundary.HARD:
        return np.zeros(grid.n_points)
    if cfg.cap_width < CAP_MIN_CELLS * grid.dx:
        raise ValueError(
            f"CAP width {cfg.cap_width:g} nm is below {CAP_MIN_CELLS} cells ({grid.dx:g} nm)"
        )
    if 2 * cfg.cap_width >= grid.length:
        raise ValueError("CAP layers overlap: grid shorter than twice the CAP width")
    depth = np.maximum(
        (grid.x_min + cfg.cap_width) - grid.x, grid.x - (grid.x_max - cfg.cap_width)
    )
    depth = np.clip(depth / cfg.cap_width, 0.0, None)
    return cfg.cap_strength * depth**2


def propagate_stack(
    amplitudes: np.ndarray,
    grid: Grid1D,
    potential: np.ndarray,
    cfg: PropagatorConfig,
    direction: int = 1,
) -> np.ndarray:
    """One Cayley step (1 + iτH)ψ' = (1 - iτH)ψ for every row of ``amplitudes[B, n]``.

    ``potential`` is (n,) or (B, n) in eV, frozen over the step.
    """
    amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
    h0 = cfg.units.hbar2_over_m / grid.dx**2
    tau = direction * cfg.dt / (2.0 * cfg.units.hbar)
    h_diag = h0 + np.asarray(potential, dtype=np.complex128) - 1j * cap_profile(grid, cfg)
    h_diag = np.ascontiguousarray(np.broadcast_to(h_diag, amplitudes.shape))
    h_off = -0.5 * h0

    rhs = apply_tridiagonal(1.0 - 1j * tau * h_diag, complex(-1j * tau * h_off), amplitudes)
    out = solve_tridiagonal(1.0 + 1j * tau * h_diag, complex(1j * tau * h_off), rhs)
    if not np.all(np.isfinite(out)):
        raise NonFiniteAmplitude(
            f"non-finite amplitude after step dt={cfg.dt:g} fs on grid dx={grid.dx:g} nm"
        )
    return out


def step_1d(
    psi: WaveField1D,
    v: Potential1D,
    cfg: PropagatorConfig,
    context: np.ndarray | None = None,
    direction: int = 1,
) -> WaveField1D:
    """Advance ``psi`` by ``direction * dt`` with other particles frozen at ``context``."""
    others = None if context is None else np.asarray(context, dtype=float)[None, :]
    values = v.evaluate(psi.grid.x, others)
    out = propagate_stack(psi.amplitudes[None, :], psi.grid, values, cfg, direction)
    return replace(psi, amplitudes=out[0], time=psi.time + direction * cfg.dt)


def _sweep_axis1(
    amplitudes: np.ndarray, grid: Grid1D, potential: np.ndarray, cfg: PropagatorConfig, sign: int
) -> np.ndarray:
    return propagate_stack(amplitudes.T, grid, potential.T, cfg, sign).T


def step_2d(
    psi: WaveField2D, v: Potential2D, cfg: PropagatorConfig, direction: int = 1
) -> WaveField2D:
    """Advance a two-particle field by one step of two exactly unitary Cayley sweeps.

    H is split as (T₁ + V₁ + C/2) + (T₂ + V₂ + C/2) with C the coupling. The sweep order
    alternates with the step index, so consecutive steps compose symmetrically and a
    backward step undoes the matching forward step. States of identical particles are
    projected back onto their exchange symmetry after the step when ``v`` is flagged
    identical and both axes share one grid.
    """
    g1, g2 = psi.grid_x1, psi.grid_x2
    half_coupling = 0.5 * v.coupling.pair(g1.x[:, None] - g2.x[None, :])
    p1 = v.axis1.external(g1.x)[:, None] + half_coupling
    p2 = v.axis2.external(g2.x)[None, :] + half_coupling

    index = round(psi.time / cfg.dt) - (1 if direction < 0 else 0)
    axis1_first = (index % 2 == 0) != (direction < 0)

    amplitudes = psi.amplitudes
    if axis1_first:
        amplitudes = _sweep_axis1(amplitudes, g1, p1, cfg, direction)
        amplitudes = propagate_stack(amplitudes, g2, p2, cfg, direction)
    else:
        amplitudes = propagate_stack(amplitudes, g2, p2, cfg, direction)
        amplitudes = _sweep_axis1(amplitudes, g1, p1, cfg, direction)

    if psi.species is not None and psi.species.identical and v.exchange_symmetric(g1, g2):
        sign = -1.0 if psi.species is Species.FERMION else 1.0
        amplitudes = 0.5 * (amplitudes + sign * amplitudes.T)
    return replace(psi, amplitudes=amplitudes, time=psi.time + direction * cfg.dt)
