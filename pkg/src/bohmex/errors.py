"""Domain exceptions raised by the simulation modules."""

from __future__ import annotations


class BohmexError(Exception):
    """Base class for simulation errors."""


class GridTooNarrow(BohmexError):
    """Raised when a grid cannot hold a packet without truncating it."""


class DegenerateState(BohmexError):
    """Raised when an antisymmetrized state vanishes (Pauli-forbidden input)."""


class MixedWidths(BohmexError):
    """Raised when phase-space distance is requested for packets of different widths."""


class TooManyParticles(BohmexError):
    """Raised when a permutation sum would exceed the supported particle count."""


class NotNormalized(BohmexError):
    """Raised when a state's norm differs from one beyond tolerance."""

    def __init__(self, norm: float, tolerance: float) -> None:
        super().__init__(f"state norm {norm:.12g} deviates from 1 by more than {tolerance:g}")
        self.norm = norm
        self.tolerance = tolerance


class NonFiniteAmplitude(BohmexError):
    """Raised when propagation produces NaN or Inf amplitudes."""


class NodeRegion(BohmexError):
    """Raised when a local quantity is requested where |ψ| is below the node threshold."""


class LeftDomain(BohmexError):
    """Raised when a trajectory exits a hard-boundary grid."""

    def __init__(self, position: float, x_min: float, x_max: float) -> None:
        super().__init__(f"trajectory at {position:.6g} nm left [{x_min:g}, {x_max:g}]")
        self.position = position


class TooFewSamples(BohmexError):
    """Raised when an ensemble is too small for Monte Carlo estimates."""


class NullAssembly(BohmexError):
    """Raised when every cofactor of the trajectory matrix vanishes."""

    def __init__(self, particle: int, time: float, norm: float) -> None:
        super().__init__(
            f"assembled wave function of particle {particle} at t={time:.6g} fs "
            f"has norm {norm:.3e}"
        )
        self.particle = particle
        self.time = time
        self.norm = norm


class PopulationOverflow(BohmexError):
    """Raised when the in-flight electron count exceeds the configured cap."""

    def __init__(self, population: int, cap: int) -> None:
        super().__init__(f"{population} electrons in flight exceeds cap {cap}")
        self.population = population
        self.cap = cap


class RecordTooShort(BohmexError):
    """Raised when a current record is too short for the requested lag window."""


class UndefinedFano(BohmexError):
    """Raised when the mean current is indistinguishable from zero."""
