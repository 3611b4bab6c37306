"""Quantum-equilibrium sampling of initial positions from |Ψ|²."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from bohmex.errors import NotNormalized
from bohmex.grid import WaveField1D, WaveField2D

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6
BURN_IN_STEPS = 1000


def _inverse_cdf(density: np.ndarray, x: np.ndarray, dx: float, u: np.ndarray) -> np.ndarray:
    cdf = cumulative_trapezoid(density, dx=dx, initial=0.0)
    cdf /= cdf[-1]
    return np.interp(u, cdf, x)


def sample_initial_positions(
    psi: WaveField1D | WaveField2D, m: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Draw ``m`` positions from |ψ|².

    Returns shape (m,) for a 1D field and (m, 2) for a 2D field, where the second
    coordinate is drawn from the conditional density of the nearest x₁ row.
    """
    if m < 1:
        raise ValueError(f"need at least one sample, got {m}")
    norm = psi.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NotNormalized(norm, NORM_TOLERANCE)
    rng = np.random.default_rng(seed)

    if isinstance(psi, WaveField1D):
        return _inverse_cdf(psi.density, psi.grid.x, psi.grid.dx, rng.random(m))

    g1, g2 = psi.grid_x1, psi.grid_x2
    x1 = _inverse_cdf(psi.marginal_x1(), g1.x, g1.dx, rng.random(m))
    u2 = rng.random(m)
    rows = np.clip(np.rint((x1 - g1.x_min) / g1.dx).astype(np.int64), 0, g1.n_points - 1)
    x2 = np.empty(m)
    density = psi.density
    for row in np.unique(rows):
        mask = rows == row
        x2[mask] = _inverse_cdf(density[row], g2.x, g2.dx, u2[mask])
    return np.column_stack([x1, x2])


def metropolis_positions(
    density: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    m: int,
    step: float,
    seed: int | np.random.Generator,
    burn_in: int = BURN_IN_STEPS,
) -> np.ndarray:
    """Sample ``m`` configurations from an unnormalized ``density`` with independent walkers.

    Each walker starts near ``start`` and performs ``burn_in`` Metropolis moves; its final
    configuration is the sample. The proposal width adapts during the first half of the
    burn-in toward 50-60 % acceptance and is frozen afterwards.
    """
    rng = np.random.default_rng(seed)
    start = np.asarray(start, dtype=float)
    walkers = start + rng.normal(size=(m, start.size)) * step
    current = density(walkers)
    for sweep in range(burn_in):
        trial = walkers + rng.normal(size=walkers.shape) * step
        proposed = density(trial)
        ratio = np.divide(proposed, current, out=np.ones_like(current), where=current > 0)
        accept = ratio > rng.random(m)
        walkers[accept] = trial[accept]
        current[accept] = proposed[accept]
        if sweep < burn_in // 2 and sweep % 20 == 19:
            rate = accept.mean() * 100.0
            if rate > 60.0:
                step *= 1.1
            elif rate < 50.0:
                step *= 0.9
    logger.debug("metropolis: %d walkers, final step %.4g", m, step)
    return walkers
