"""Single-particle and two-particle potential energies (eV)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from bohmex.grid import Grid1D
from bohmex.units import COULOMB_EV_NM


class PotentialKind(StrEnum):
    FREE = "free"
    CONSTANT = "constant"
    HARMONIC_PAIR = "harmonic_pair"
    COULOMB_SOFT = "coulomb_soft"
    LINEAR_RAMP = "linear_ramp"
    SUM = "sum"


PAIR_KINDS = frozenset({PotentialKind.HARMONIC_PAIR, PotentialKind.COULOMB_SOFT})


@dataclass(frozen=True)
class Potential1D:
    """Potential seen by one particle, split into an external part and a pair part.

    The potential of channel ``a`` at ``x`` is ``external(x) + Σ_k pair(x - r_k)`` where the
    sum runs over the context positions r_k of the other particles.

    ``strength`` is c (eV/nm²) for HARMONIC_PAIR, V₀ (eV) for CONSTANT and the bias (V)
    for LINEAR_RAMP. ``length`` is the ramp length, ``softening`` the Coulomb α (nm).
    """

    kind: PotentialKind = PotentialKind.FREE
    strength: float = 0.0
    length: float = 0.0
    softening: float = 0.0
    epsilon_r: float = 1.0
    components: tuple[Potential1D, ...] = ()

    @classmethod
    def free(cls) -> Potential1D:
        return cls()

    @classmethod
    def constant(cls, value: float) -> Potential1D:
        return cls(PotentialKind.CONSTANT, strength=value)

    @classmethod
    def harmonic_pair(cls, c: float) -> Potential1D:
        return cls(PotentialKind.HARMONIC_PAIR, strength=c)

    @classmethod
    def coulomb_soft(cls, softening: float, epsilon_r: float = 1.0) -> Potential1D:
        if softening <= 0:
            raise ValueError("Coulomb softening must be positive")
        return cls(PotentialKind.COULOMB_SOFT, softening=softening, epsilon_r=epsilon_r)

    @classmethod
    def linear_ramp(cls, bias: float, length: float) -> Potential1D:
        if length <= 0:
            raise ValueError("ramp length must be positive")
        return cls(PotentialKind.LINEAR_RAMP, strength=bias, length=length)

    @classmethod
    def sum(cls, *parts: Potential1D) -> Potential1D:
        return cls(PotentialKind.SUM, components=tuple(parts))

    def _leaves(self) -> tuple[Potential1D, ...]:
        if self.kind is PotentialKind.SUM:
            return tuple(leaf for part in self.components for leaf in part._leaves())
        return (self,)

    @property
    def depends_on_context(self) -> bool:
        return any(leaf.kind in PAIR_KINDS for leaf in self._leaves())

    @property
    def is_constant(self) -> bool:
        return all(
            leaf.kind in (PotentialKind.FREE, PotentialKind.CONSTANT) for leaf in self._leaves()
        )

    def external(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for leaf in self._leaves():
            if leaf.kind is PotentialKind.CONSTANT:
                out = out + leaf.strength
            elif leaf.kind is PotentialKind.LINEAR_RAMP:
                out = out - leaf.strength * np.clip(x / leaf.length, 0.0, 1.0)
        return out

    def pair(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        out = np.zeros_like(d)
        for leaf in self._leaves():
            if leaf.kind is PotentialKind.HARMONIC_PAIR:
                out = out + leaf.strength * d * d
            elif leaf.kind is PotentialKind.COULOMB_SOFT:
                out = out + COULOMB_EV_NM / leaf.epsilon_r / np.sqrt(d * d + leaf.softening**2)
        return out

    def evaluate(self, x: np.ndarray, context: np.ndarray | None = None) -> np.ndarray:
        """U(x) with other particles frozen at ``context[..., K]``; returns shape (..., n).

        Every kind is static; time enters only through the context positions.
        """
        base = self.external(x)
        if context is None or not self.depends_on_context:
            if context is None:
                return base
            return np.broadcast_to(base, (*np.shape(context)[:-1], base.size)).copy()
        context = np.asarray(context, dtype=float)
        d = np.asarray(x, dtype=float)[None, :] - context[..., :, None]
        return base + self.pair(d).sum(axis=-2)

    def configuration_energy(self, X: np.ndarray) -> np.ndarray:
        """Total potential energy of configurations ``X[..., N]``, each pair counted once."""
        X = np.asarray(X, dtype=float)
        energy = self.external(X).sum(axis=-1)
        n = X.shape[-1]
        for a in range(n):
            for b in range(a + 1, n):
                energy = energy + self.pair(X[..., a] - X[..., b])
        return energy


@dataclass(frozen=True)
class Potential2D:
    """V(x₁, x₂) = axis1(x₁) + axis2(x₂) + coupling(x₁ - x₂)."""

    axis1: Potential1D = Potential1D()
    axis2: Potential1D = Potential1D()
    coupling: Potential1D = Potential1D()
    identical: bool = False

    def __post_init__(self) -> None:
        if self.identical and self.axis1 != self.axis2:
            raise ValueError("identical-particle potentials must act equally on both axes")

    def exchange_symmetric(self, grid_x1: Grid1D, grid_x2: Grid1D) -> bool:
        """True when swapping x₁ and x₂ maps this potential on these grids onto itself."""
        return self.identical and grid_x1 == grid_x2

    @classmethod
    def from_pair(cls, potential: Potential1D, identical: bool = False) -> Potential2D:
        """Two-particle potential whose per-particle channel potential is ``potential``."""
        return cls(axis1=potential, axis2=potential, coupling=potential, identical=identical)

    @property
    def separable(self) -> bool:
        return not self.coupling.depends_on_context

    def evaluate(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return (
            self.axis1.external(x1)[:, None]
            + self.axis2.external(x2)[None, :]
            + self.coupling.pair(x1[:, None] - x2[None, :])
        )
