"""The N×N conditional set ψ̃_{l,a} and assembly of exchange-symmetric conditional waves."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import StrEnum

import numpy as np

from bohmex.analytic import gaussian_overlap, symmetrized_amplitude
from bohmex.bohm.trajectory import cap_velocity, heun_position
from bohmex.bohm.velocity import STENCIL_OFFSETS, Guidance, local_guidance
from bohmex.errors import DegenerateState, NullAssembly
from bohmex.grid import Grid1D, WaveField1D
from bohmex.linalg import cofactors
from bohmex.packets import GaussianPacketSpec, Species, build_manybody_2d, build_packet
from bohmex.sampling import metropolis_positions, sample_initial_positions
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import PropagatorConfig, propagate_stack

logger = logging.getLogger(__name__)

NULL_NORM = 1e-14
DEGENERATE_GRAM = 1e-12
SAMPLING_POINTS = 513


class PhaseRule(StrEnum):
    """How the trajectory matrix is evaluated.

    OCCUPIED_NODE, the default, evaluates in the assembled particle's channel,
    T⁽ᵃ⁾[l, k] = ψ̃_{l,a}(r_k). Fermion Ψ_a then vanishes at every other occupied position
    for any potential.
    TRAJECTORY uses each particle's own channel, T[l, k] = ψ̃_{l,k}(r_k). It keeps the
    interchange symmetry but only has those nodes while the channel potentials coincide,
    as in free space or for external-only potentials.
    """

    TRAJECTORY = "trajectory"
    OCCUPIED_NODE = "occupied-node"


@dataclass
class ConditionalSet:
    """Fields ``[b, l, a]`` hold ψ̃_{l,a}: initial packet l propagated in channel U_a.

    The leading axis has one entry per ensemble member, or a single entry shared by all
    members when the channel potentials do not depend on the trajectories.
    """

    grid: Grid1D
    fields: np.ndarray
    species: Species
    positions: np.ndarray
    packets: list[GaussianPacketSpec]
    time: float = 0.0
    phase_rule: PhaseRule = PhaseRule.OCCUPIED_NODE
    seeds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n_particles(self) -> int:
        return self.positions.shape[1]

    @property
    def n_members(self) -> int:
        return self.positions.shape[0]

    @property
    def shared(self) -> bool:
        return self.fields.shape[0] == 1

    def member_index(self) -> np.ndarray:
        if self.shared:
            return np.zeros(self.n_members, dtype=np.int64)
        return np.arange(self.n_members)

    def field(self, l: int, a: int, member: int = 0) -> WaveField1D:  # noqa: E741
        b = 0 if self.shared else member
        return WaveField1D(self.grid, self.fields[b, l, a].copy(), self.time)


@dataclass
class TrajectoryMatrix:
    """Per-member matrices; shape (M, N, N) or (M, N, N, N) indexed [m, a, l, k]."""

    values: np.ndarray
    rule: PhaseRule


def _check_not_degenerate(packets: Sequence[GaussianPacketSpec], species: Species) -> None:
    if species is not Species.FERMION or len(packets) < 2:
        return
    gram = np.array([[gaussian_overlap(p, q) for q in packets] for p in packets])
    if abs(np.linalg.det(gram)) < DEGENERATE_GRAM:
        raise DegenerateState("fermion packets are linearly dependent (Pauli-forbidden)")


def _sampling_grid(packets: Sequence[GaussianPacketSpec], grid: Grid1D) -> Grid1D:
    lo = max(grid.x_min, min(p.x0 - 6.0 * p.sigma_x for p in packets))
    hi = min(grid.x_max, max(p.x0 + 6.0 * p.sigma_x for p in packets))
    return Grid1D(lo, hi, SAMPLING_POINTS)


def sample_symmetrized(
    packets: Sequence[GaussianPacketSpec],
    species: Species,
    grid: Grid1D,
    m: int,
    seed: int | np.random.Generator,
) -> np.ndarray:
    """Initial positions (m, N) from the (anti)symmetrized product density."""
    n = len(packets)
    if n == 1:
        return sample_initial_positions(build_packet(packets[0], grid), m, seed)[:, None]
    if n == 2:
        sub = _sampling_grid(packets, grid)
        state = build_manybody_2d(packets[0], packets[1], species, sub)
        return sample_initial_positions(state, m, seed)
    start = np.array([p.x0 for p in packets])
    step = 0.5 * float(np.mean([p.sigma_x for p in packets]))

    def density(X: np.ndarray) -> np.ndarray:
        return np.abs(symmetrized_amplitude(packets, species, X)) ** 2

    return grid.clamp(metropolis_positions(density, start, m, step, seed))


def init_conditional_set(
    packets: Sequence[GaussianPacketSpec],
    species: Species,
    grid: Grid1D,
    m: int = 1,
    seed: int | np.random.Generator = 0,
    per_member: bool = False,
    initial_positions: np.ndarray | None = None,
    phase_rule: PhaseRule = PhaseRule.OCCUPIED_NODE,
) -> ConditionalSet:
    """N² copies of the initial packets plus M quantum-equilibrium trajectory starts.

    ``per_member`` gives each ensemble member its own fields, needed whenever channel
    potentials depend on the other trajectories.
    """
    packets = list(packets)
    _check_not_degenerate(packets, species)
    rows = np.stack([build_packet(p, grid).amplitudes for p in packets])
    n = len(packets)
    fields = np.ascontiguousarray(np.broadcast_to(rows[None, :, None, :], (1, n, n, grid.n_points)))
    if initial_positions is None:
        positions = sample_symmetrized(packets, species, grid, m, seed)
    else:
        positions = np.array(initial_positions, dtype=float).reshape(-1, n)
    if per_member and positions.shape[0] > 1:
        fields = np.repeat(fields, positions.shape[0], axis=0)
    seeds = np.full(positions.shape[0], seed if isinstance(seed, int) else -1, dtype=np.int64)
    return ConditionalSet(
        grid=grid,
        fields=fields,
        species=species,
        positions=positions,
        packets=packets,
        phase_rule=phase_rule,
        seeds=seeds,
    )


def _interpolate_fields(cset: ConditionalSet, channel: np.ndarray, X: np.ndarray) -> np.ndarray:
    """ψ̃_{l, channel}(X) for every l; ``channel`` and ``X`` share shape (M, K)."""
    idx, frac = cset.grid.locate(X)
    b = cset.member_index()[:, None, None]
    l = np.arange(cset.n_particles)[None, :, None]  # noqa: E741
    ch = channel[:, None, :]
    lo = cset.fields[b, l, ch, idx[:, None, :]]
    hi = cset.fields[b, l, ch, idx[:, None, :] + 1]
    return lo + (hi - lo) * frac[:, None, :]


def trajectory_matrix(cset: ConditionalSet) -> TrajectoryMatrix:
    m, n = cset.positions.shape
    if cset.phase_rule is PhaseRule.TRAJECTORY:
        channel = np.broadcast_to(np.arange(n), (m, n))
        return TrajectoryMatrix(_interpolate_fields(cset, channel, cset.positions), cset.phase_rule)
    per_channel = [
        _interpolate_fields(cset, np.full((m, n), a), cset.positions) for a in range(n)
    ]
    return TrajectoryMatrix(np.stack(per_channel, axis=1), cset.phase_rule)


def _scaled_cofactors(T: np.ndarray, species: Species) -> np.ndarray:
    scale = np.abs(T).max(axis=-2, keepdims=True)
    scale[scale == 0] = 1.0
    return cofactors(T / scale, species)


def conditional_weights(cset: ConditionalSet) -> np.ndarray:
    """Weights w[m, l, a] with Ψ_a(x) = Σ_l ψ̃_{l,a}(x) w[m, l, a].

    Columns of the trajectory matrix are rescaled to unit maximum before taking
    cofactors; this multiplies each Ψ_a by a position-independent factor.
    """
    m, n = cset.positions.shape
    if cset.species is Species.DISTINGUISHABLE:
        return np.broadcast_to(np.eye(n, dtype=np.complex128), (m, n, n)).copy()
    matrix = trajectory_matrix(cset)
    if matrix.rule is PhaseRule.TRAJECTORY:
        return _scaled_cofactors(matrix.values, cset.species)
    C = _scaled_cofactors(matrix.values.reshape(m * n, n, n), cset.species).reshape(m, n, n, n)
    diag = np.arange(n)
    return C[:, diag, :, diag].transpose(1, 2, 0)


def assemble_conditional(cset: ConditionalSet, a: int, member: int = 0) -> WaveField1D:
    """Normalized conditional wave function Ψ_a of one ensemble member on the grid."""
    weights = conditional_weights(cset)[member, :, a]
    b = 0 if cset.shared else member
    amplitudes = np.tensordot(weights, cset.fields[b, :, a, :], axes=(0, 0))
    psi = WaveField1D(cset.grid, amplitudes, cset.time)
    norm = psi.norm()
    if norm < NULL_NORM:
        raise NullAssembly(a, cset.time, norm)
    return psi.normalized()


def evaluate_conditional(
    cset: ConditionalSet, a: int, x: np.ndarray, member: int = 0
) -> np.ndarray:
    """Unnormalized Ψ_a of one member at arbitrary points, with the weights of
    :func:`conditional_weights`."""
    weights = conditional_weights(cset)[member, :, a]
    b = 0 if cset.shared else member
    x = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.stack([cset.grid.interpolate(row, x) for row in cset.fields[b, :, a]])
    return np.tensordot(weights, values, axes=(0, 0))


def occupied_node_residual(cset: ConditionalSet) -> float:
    """Worst |Ψ_a(r_k)| / max|Ψ_a| over members, channels a and other particles k ≠ a."""
    m, n = cset.positions.shape
    worst = 0.0
    if n < 2:
        return worst
    for member in range(m):
        for a in range(n):
            peak = float(np.abs(evaluate_conditional(cset, a, cset.grid.x, member)).max())
            if peak == 0.0:
                continue
            others = np.delete(cset.positions[member], a)
            value = np.abs(evaluate_conditional(cset, a, others, member)).max()
            worst = max(worst, float(value) / peak)
    return worst


def guidance(cset: ConditionalSet, cfg: PropagatorConfig) -> Guidance:
    """Velocity and Q of every particle of every member at the current positions.

    Only four-point stencils of the assembled Ψ_a around r_a are formed. The node
    threshold is measured against Σ_l |w_l| max|ψ̃_{l,a}|, an upper bound of max|Ψ_a|.
    """
    m, n = cset.positions.shape
    weights = conditional_weights(cset)
    bound = np.abs(weights).sum(axis=1)
    null = bound**2 < NULL_NORM
    if np.any(null):
        member, particle = np.argwhere(null)[0]
        raise NullAssembly(int(particle), cset.time, float(bound[member, particle] ** 2))

    idx, frac = cset.grid.locate(cset.positions)
    cols = np.clip(idx[..., None] + STENCIL_OFFSETS, 0, cset.grid.n_points - 1)
    b = cset.member_index()[:, None, None, None]
    l = np.arange(n)[None, :, None, None]  # noqa: E741
    a = np.arange(n)[None, None, :, None]
    stencils = cset.fields[b, l, a, cols[:, None, :, :]]
    assembled = np.einsum("mlas,mla->mas", stencils, weights)

    field_peak = np.abs(cset.fields).max(axis=-1)[cset.member_index()]
    peak = np.einsum("mla,mla->ma", np.abs(weights), field_peak)
    return local_guidance(assembled, frac, cset.grid.dx, cfg.units, peak)


def channel_potentials(
    cset: ConditionalSet,
    potential: Potential1D,
    extra_context: np.ndarray | None = None,
) -> np.ndarray:
    """U_a(x) for every channel, shape (B, N, n), with trajectories frozen at their
    current positions. ``extra_context[M, K]`` adds particles outside this set."""
    x = cset.grid.x
    n = cset.n_particles
    if not potential.depends_on_context:
        return np.broadcast_to(potential.external(x), (1, n, x.size))
    if cset.shared and cset.n_members > 1:
        raise ValueError("trajectory-dependent potentials need per-member fields")
    channels = []
    for a in range(n):
        context = np.delete(cset.positions, a, axis=1)
        if extra_context is not None:
            context = np.concatenate([context, extra_context], axis=1)
        channels.append(potential.evaluate(x, context))
    return np.stack(channels, axis=1)


def propagate_fields(
    cset: ConditionalSet,
    potential: Potential1D,
    cfg: PropagatorConfig,
    extra_context: np.ndarray | None = None,
) -> np.ndarray:
    """Fields after one step; distinguishable sets only advance their diagonal."""
    U = channel_potentials(cset, potential, extra_context)
    B, n, _, npts = cset.fields.shape
    if cset.species is Species.DISTINGUISHABLE:
        diag = np.arange(n)
        fields = cset.fields.copy()
        pot = np.broadcast_to(U, (B, n, npts)).reshape(-1, npts)
        stepped = propagate_stack(fields[:, diag, diag].reshape(-1, npts), cset.grid, pot, cfg)
        fields[:, diag, diag] = stepped.reshape(B, n, npts)
        return fields
    pot = np.broadcast_to(U[:, None, :, :], (B, n, n, npts)).reshape(-1, npts)
    stepped = propagate_stack(cset.fields.reshape(-1, npts), cset.grid, pot, cfg)
    return stepped.reshape(B, n, n, npts)


class ConditionalStepper:
    """Lockstep Heun update of trajectories and their conditional set."""

    def __init__(self, potential: Potential1D, cfg: PropagatorConfig) -> None:
        self._potential = potential
        self._cfg = cfg

    def step(
        self, cset: ConditionalSet, extra_context: np.ndarray | None = None
    ) -> tuple[Guidance, ConditionalSet]:
        """Advance one dt; returns the guidance at the step start and the new set."""
        cfg = self._cfg
        v_cap = cset.grid.dx / cfg.dt
        start = guidance(cset, cfg)
        v0 = cap_velocity(start.velocity, v_cap)
        start.velocity = v0
        predicted = cset.grid.clamp(cset.positions + cfg.dt * v0)

        fields = propagate_fields(cset, self._potential, cfg, extra_context)
        time = cset.time + cfg.dt
        trial = replace(cset, fields=fields, positions=predicted, time=time)
        v1 = cap_velocity(guidance(trial, cfg).velocity, v_cap)
        positions = cset.grid.clamp(heun_position(cset.positions, v0, v1, cfg.dt))
        return start, replace(cset, fields=fields, positions=positions, time=time)


def add_particle(
    cset: ConditionalSet, spec: GaussianPacketSpec, position: float | np.ndarray
) -> ConditionalSet:
    """Append a packet row and channel column.

    Row ψ̃_{new,a} starts as the new packet in every channel; column ψ̃_{l,new} of each
    existing particle starts from its own-channel field ψ̃_{l,l}.
    """
    B, n, _, npts = cset.fields.shape
    fields = np.empty((B, n + 1, n + 1, npts), dtype=np.complex128)
    fields[:, :n, :n] = cset.fields
    fields[:, n, :] = build_packet(spec, cset.grid).amplitudes
    diag = np.arange(n)
    fields[:, :n, n] = cset.fields[:, diag, diag]
    column = np.broadcast_to(np.asarray(position, dtype=float), (cset.n_members,))
    positions = np.column_stack([cset.positions, column])
    return replace(cset, fields=fields, positions=positions, packets=[*cset.packets, spec])


def remove_particle(cset: ConditionalSet, index: int) -> ConditionalSet:
    fields = np.delete(np.delete(cset.fields, index, axis=1), index, axis=2)
    packets = [p for i, p in enumerate(cset.packets) if i != index]
    return replace(
        cset,
        fields=np.ascontiguousarray(fields),
        positions=np.delete(cset.positions, index, axis=1),
        packets=packets,
    )
