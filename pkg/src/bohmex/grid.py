"""Uniform grids and complex wave fields sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import trapezoid

if TYPE_CHECKING:
    from bohmex.packets import Species

MIN_POINTS = 16


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.n_points < MIN_POINTS:
            raise ValueError(f"n_points must be >= {MIN_POINTS}, got {self.n_points}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def contains(self, x: float | np.ndarray) -> bool | np.ndarray:
        return (x >= self.x_min) & (x <= self.x_max)

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.x_min, self.x_max)

    def locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Left cell index and fractional offset of each point, clamped into the grid."""
        s = (np.asarray(x, dtype=float) - self.x_min) / self.dx
        idx = np.clip(np.floor(s).astype(np.int64), 0, self.n_points - 2)
        frac = np.clip(s - idx, 0.0, 1.0)
        return idx, frac

    def interpolate(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Linear interpolation of ``values[..., n]`` at points ``x`` broadcast over the rows."""
        idx, frac = self.locate(x)
        if values.ndim == 1:
            lo, hi = values[idx], values[idx + 1]
        else:
            lo = np.take_along_axis(values, idx[..., None], axis=-1)[..., 0]
            hi = np.take_along_axis(values, idx[..., None] + 1, axis=-1)[..., 0]
        return lo + (hi - lo) * frac

    def refined(self, factor: int = 2) -> Grid1D:
        return replace(self, n_points=(self.n_points - 1) * factor + 1)


@dataclass
class WaveField1D:
    grid: Grid1D
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitudes shape {self.amplitudes.shape} does not match grid "
                f"({self.grid.n_points},)"
            )

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(trapezoid(self.density, dx=self.grid.dx))

    def normalized(self) -> WaveField1D:
        return replace(self, amplitudes=self.amplitudes / np.sqrt(self.norm()))

    def at(self, x: float | np.ndarray) -> np.ndarray:
        return self.grid.interpolate(self.amplitudes, np.asarray(x, dtype=float))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.amplitudes)))


@dataclass
class WaveField2D:
    """Two-particle amplitude Ψ(x₁, x₂) with x₁ along axis 0."""

    grid_x1: Grid1D
    grid_x2: Grid1D
    amplitudes: np.ndarray
    time: float = 0.0
    species: Species | None = field(default=None)

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = (self.grid_x1.n_points, self.grid_x2.n_points)
        if self.amplitudes.shape != expected:
            raise ValueError(f"amplitudes shape {self.amplitudes.shape} != {expected}")

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def same_grids(self) -> bool:
        return self.grid_x1 == self.grid_x2

    def norm(self) -> float:
        inner = trapezoid(self.density, dx=self.grid_x2.dx, axis=1)
        return float(trapezoid(inner, dx=self.grid_x1.dx))

    def normalized(self) -> WaveField2D:
        return replace(self, amplitudes=self.amplitudes / np.sqrt(self.norm()))

    def marginal_x1(self) -> np.ndarray:
        return trapezoid(self.density, dx=self.grid_x2.dx, axis=1)

    def marginal_x2(self) -> np.ndarray:
        return trapezoid(self.density, dx=self.grid_x1.dx, axis=0)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.amplitudes)))
