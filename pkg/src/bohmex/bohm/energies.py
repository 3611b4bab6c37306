"""Ensemble kinetic, quantum and potential energies along Bohmian trajectories."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from bohmex.bohm.trajectory import TrajectoryEnsemble
from bohmex.errors import TooFewSamples
from bohmex.tdse.potentials import Potential1D
from bohmex.units import UnitSystem

logger = logging.getLogger(__name__)

MIN_MEMBERS = 100


@dataclass
class EnergyBreakdown:
    time: float
    k_per_particle: np.ndarray
    q_per_particle: np.ndarray
    potential: float
    total: float
    k_error: np.ndarray
    q_error: np.ndarray
    node_samples: int = 0

    def row(self) -> dict[str, float]:
        out: dict[str, float] = {"time_fs": self.time}
        for j, (k, q) in enumerate(zip(self.k_per_particle, self.q_per_particle, strict=True)):
            out[f"K{j + 1}_eV"] = float(k)
            out[f"Q{j + 1}_eV"] = float(q)
        out["V_eV"] = self.potential
        out["total_eV"] = self.total
        out["node_samples"] = self.node_samples
        return out


def ensemble_energies(
    ens: TrajectoryEnsemble, potential: Potential1D, units: UnitSystem
) -> list[EnergyBreakdown]:
    """Monte Carlo estimates of ⟨K_j⟩, ⟨Q_j⟩ and ⟨V⟩ at every recorded time.

    A sample flagged as lying in a node region gets Q_j from energy balance: the
    unflagged ensemble mean of K_j + Q_j minus its own K_j.
    """
    if ens.n_members < MIN_MEMBERS:
        raise TooFewSamples(
            f"ensemble energies need at least {MIN_MEMBERS} members, got {ens.n_members}"
        )
    kinetic = 0.5 * units.mass * ens.velocities**2
    breakdowns = []
    flagged_total = 0
    for t_idx, time in enumerate(ens.times):
        k = kinetic[t_idx]
        q = ens.quantum[t_idx].copy()
        node = ens.node[t_idx] | ~np.isfinite(q)
        flagged = int(node.sum())
        if flagged:
            regular = np.where(node, np.nan, k + q)
            balance = np.nanmean(regular, axis=0)
            q = np.where(node, balance[None, :] - k, q)
        flagged_total += flagged

        v = float(np.mean(potential.configuration_energy(ens.positions[t_idx])))
        m = ens.n_members
        k_mean, q_mean = k.mean(axis=0), q.mean(axis=0)
        breakdowns.append(
            EnergyBreakdown(
                time=float(time),
                k_per_particle=k_mean,
                q_per_particle=q_mean,
                potential=v,
                total=float(k_mean.sum() + q_mean.sum() + v),
                k_error=k.std(axis=0, ddof=1) / np.sqrt(m),
                q_error=q.std(axis=0, ddof=1) / np.sqrt(m),
                node_samples=flagged,
            )
        )
    if flagged_total:
        logger.warning("energy balance used for %d node-region samples", flagged_total)
    return breakdowns
