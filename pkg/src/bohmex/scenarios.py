"""Scenario registry and runners.

Every scenario writes its CSV tables into the configured output directory, evaluates its
acceptance gates and finishes with a ``manifest.json`` describing the run.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from bohmex import __version__
from bohmex.analytic import ensemble_kinetic_energy, grid_kinetic_energy
from bohmex.bohm.energies import EnergyBreakdown, ensemble_energies
from bohmex.bohm.exact2d import evolve_exact_2d
from bohmex.bohm.trajectory import TrajectoryEnsemble
from bohmex.config import ConfigError, ScenarioConfig, ScenarioName
from bohmex.errors import GridTooNarrow, NullAssembly
from bohmex.exchange.conditional import (
    ConditionalSet,
    PhaseRule,
    assemble_conditional,
    init_conditional_set,
    sample_symmetrized,
)
from bohmex.exchange.evolve import evolve_system
from bohmex.exchange.spin import spin_factorization_error
from bohmex.export.base import Exporter, check_suffix
from bohmex.export.csv_export import CsvExporter
from bohmex.export.json_export import JsonExporter
from bohmex.export.snapshot_export import SnapshotExporter
from bohmex.grid import Grid1D, WaveField1D, WaveField2D
from bohmex.noise import autocorrelation, power_spectrum, spectral_peak
from bohmex.packets import (
    GaussianPacketSpec,
    Species,
    build_manybody_2d,
    packet_triple,
    phase_space_distance,
)
from bohmex.properties import GateResult, gate_below, property_suite
from bohmex.tdse.observables import Observable, expectation
from bohmex.tdse.potentials import Potential1D, Potential2D
from bohmex.transport.device import Interaction
from bohmex.transport.records import DwellStatistics
from bohmex.transport.simulator import TransportResult, TransportSimulation, run_sweep
from bohmex.units import UnitSystem

logger = logging.getLogger(__name__)

FERMION_DIP_EV = 0.022
BOSON_DIP_EV = 0.019
SAMPLE_TRAJECTORIES = 20
CURRENT_BATCHES = 20
SEPARATION_SIGMAS = 3.0
DWELL_DD_BIAS = 0.05
PHASE_ADVANCE_LIMIT = math.pi / 4
KDX_LIMIT = 0.35
MOMENTUM_SIGMAS = 3.0
SPIN_GRID_POINTS = 2049
KINETIC_COLUMNS = ("d", "d_measured", "T_fermion_eV", "T_boson_eV", "T_distinguishable_eV")
KINETIC_CHECK_COLUMNS = ("d", "T_analytic_eV", "T_quadrature_eV", "relative_error")
SPIN_CHECK_COLUMNS = ("d", "max_relative_error", "samples")
DWELL_COLUMNS = ("bias_V", "interaction", *DwellStatistics().as_dict())

CurrentPoint = tuple[float, float]

PACKET_SCENARIOS = frozenset(
    {
        ScenarioName.FIG3_FREE_DISTINGUISHABLE,
        ScenarioName.FIG6_FERMION_BOSON_TRAJECTORIES,
        ScenarioName.FIG7_ENERGIES,
        ScenarioName.FIG11_12_HARMONIC_NO_EXCHANGE,
        ScenarioName.FIG13_14_HARMONIC_EXCHANGE,
    }
)
EXACT_2D_SCENARIOS = frozenset(
    {ScenarioName.FIG11_12_HARMONIC_NO_EXCHANGE, ScenarioName.FIG13_14_HARMONIC_EXCHANGE}
)
TRANSPORT_SCENARIOS = frozenset(
    {
        ScenarioName.TRANSPORT_IV,
        ScenarioName.TRANSPORT_NOISE,
        ScenarioName.TRANSPORT_POPULATION,
    }
)


@dataclass
class ScenarioOutcome:
    """Artifacts, gate results and headline numbers of one scenario run."""

    scenario: ScenarioName
    output_dir: Path
    gates_enabled: bool = True
    artifacts: list[str] = field(default_factory=list)
    gates: list[GateResult] = field(default_factory=list)
    summary: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.gates_enabled or all(g.passed for g in self.gates)

    @property
    def failed_gates(self) -> list[GateResult]:
        return [g for g in self.gates if not g.passed]

    def export(self, exporter: Exporter, data: object, name: str) -> Path:
        check_suffix(exporter, name)
        path = self.output_dir / name
        exporter.export(data, path)
        self.artifacts.append(name)
        return path

    def table(
        self, name: str, rows: Sequence[dict[str, object]], columns: Sequence[str] = ()
    ) -> None:
        self.export(CsvExporter(columns), rows, name)
        logger.info("wrote %s (%d rows)", self.output_dir / name, len(rows))

    def write_manifest(self, cfg: ScenarioConfig) -> Path:
        path = self.output_dir / "manifest.json"
        JsonExporter().export(
            {
                "scenario": str(self.scenario),
                "seed": cfg.seed,
                "version": __version__,
                "config": cfg.to_dict(),
                "artifacts": sorted(self.artifacts),
                "gates": [g.row() for g in self.gates],
                "passed": self.passed,
                "summary": self.summary,
            },
            path,
        )
        return path


ScenarioRunner = Callable[[ScenarioConfig, ScenarioOutcome], None]


@dataclass(frozen=True)
class Scenario:
    name: ScenarioName
    description: str
    runner: ScenarioRunner


SCENARIOS: dict[ScenarioName, Scenario] = {}


def _scenario(name: ScenarioName, description: str) -> Callable[[ScenarioRunner], ScenarioRunner]:
    def register(runner: ScenarioRunner) -> ScenarioRunner:
        SCENARIOS[name] = Scenario(name, description, runner)
        return runner

    return register


def _tolerance(cfg: ScenarioConfig, gate: str, default: float) -> float:
    return float(cfg.gates.tolerances.get(gate, default))


class SnapshotWriter:
    """on_record hook dumping fields at the first record at or after each requested time."""

    def __init__(self, outcome: ScenarioOutcome, times: Sequence[float], member: int = 0) -> None:
        self._outcome = outcome
        self._pending = sorted(times)
        self._member = member
        self._exporter: Exporter = SnapshotExporter()

    def _due(self, time: float) -> bool:
        if not self._pending or time < self._pending[0] - 1e-9:
            return False
        while self._pending and time >= self._pending[0] - 1e-9:
            self._pending.pop(0)
        return True

    def __call__(self, state: ConditionalSet | WaveField2D) -> None:
        if isinstance(state, WaveField2D):
            if self._due(state.time):
                self._write(state, f"snapshot2d_t{state.time:.1f}.bxwf")
            return
        if not self._due(state.time):
            return
        member = min(self._member, state.n_members - 1)
        for a in range(state.n_particles):
            try:
                field_a = assemble_conditional(state, a, member)
            except NullAssembly as exc:
                logger.warning("snapshot of particle %d skipped: %s", a, exc)
                continue
            self._write(field_a, f"snapshot_t{state.time:.1f}_a{a + 1}.bxwf")

    def _write(self, state: WaveField1D | WaveField2D, name: str) -> None:
        self._outcome.export(self._exporter, state, name)


def run_ensemble(
    cfg: ScenarioConfig,
    packets: Sequence[GaussianPacketSpec],
    species: Species,
    potential: Potential1D,
    grid: Grid1D,
    on_record: Callable[[ConditionalSet], None] | None = None,
) -> TrajectoryEnsemble:
    """Evolve ``ensemble.members`` trajectories in chunks with independent spawned seeds.

    Fields are shared across a chunk unless the potential depends on the other particles.
    ``on_record`` only sees the first chunk.
    """
    members, chunk = cfg.ensemble.members, cfg.ensemble.chunk
    sizes = [min(chunk, members - start) for start in range(0, members, chunk)]
    seeds = np.random.SeedSequence(cfg.seed).generate_state(len(sizes))
    prop = cfg.propagator()
    parts = []
    for i, (size, seed) in enumerate(zip(sizes, seeds, strict=True)):
        cset = init_conditional_set(
            packets,
            species,
            grid,
            m=size,
            seed=int(seed),
            per_member=potential.depends_on_context,
            phase_rule=PhaseRule(cfg.ensemble.phase_rule),
        )
        _, ens = evolve_system(
            cset,
            potential,
            prop,
            cfg.n_steps,
            cfg.propagation.record_every,
            on_record if i == 0 else None,
        )
        parts.append(ens)
        logger.info("chunk %d/%d finished (%d members, %s)", i + 1, len(sizes), size, species)
    return TrajectoryEnsemble.concatenate(parts)


def _energy_rows(breakdowns: Sequence[EnergyBreakdown]) -> list[dict[str, object]]:
    return [b.row() for b in breakdowns]


def _trajectory_rows(ens: TrajectoryEnsemble, limit: int = SAMPLE_TRAJECTORIES) -> list[dict]:
    rows = []
    for member in range(min(limit, ens.n_members)):
        for ti, time in enumerate(ens.times):
            row: dict[str, object] = {"member": member, "time_fs": float(time)}
            for j in range(ens.n_particles):
                row[f"x{j + 1}_nm"] = float(ens.positions[ti, member, j])
            rows.append(row)
    return rows


def _members_note(cfg: ScenarioConfig) -> dict[str, object]:
    return {
        "ensemble_members": cfg.ensemble.members,
        "monte_carlo_scaling": "standard errors scale as 1/sqrt(ensemble_members)",
    }


@_scenario(ScenarioName.FIG1_KINETIC_VS_D, "Three-particle <T> against phase-space distance")
def run_kinetic_vs_distance(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    kin = cfg.kinetic
    units = cfg.unit_system
    rows = []
    for d in kin.distances:
        triple = packet_triple(d, kin.x_center, kin.k_center, kin.sigma_x, units)
        values = {s: ensemble_kinetic_energy(triple, s) for s in Species}
        rows.append(
            {
                "d": d,
                "d_measured": phase_space_distance(triple[0], triple[1]),
                "T_fermion_eV": values[Species.FERMION],
                "T_boson_eV": values[Species.BOSON],
                "T_distinguishable_eV": values[Species.DISTINGUISHABLE],
            }
        )
    out.table("kinetic.csv", rows, KINETIC_COLUMNS)

    checks = []
    for d in kin.check_distances:
        triple = packet_triple(d, kin.x_center, kin.k_center, kin.sigma_x, units)
        half = (d + 7.0) * kin.sigma_x
        grid = Grid1D(kin.x_center - half, kin.x_center + half, kin.quadrature_points)
        analytic = ensemble_kinetic_energy(triple, Species.FERMION)
        quadrature = grid_kinetic_energy(triple, Species.FERMION, grid)
        checks.append(
            {
                "d": d,
                "T_analytic_eV": analytic,
                "T_quadrature_eV": quadrature,
                "relative_error": abs(quadrature - analytic) / analytic,
            }
        )
    out.table("kinetic_check.csv", checks, KINETIC_CHECK_COLUMNS)

    far = [r for r in rows if r["d"] >= 4.0]
    far_error = max(
        (
            abs(r["T_fermion_eV"] - r["T_distinguishable_eV"]) / r["T_distinguishable_eV"]
            for r in far
        ),
        default=0.0,
    )
    out.gates.append(
        gate_below("pauli_far_limit", far_error, _tolerance(cfg, "pauli_far_limit", 0.01), "d >= 4")
    )
    near = sorted((r for r in rows if r["d"] < 2.0), key=lambda r: r["d"])
    excess = [r["T_fermion_eV"] - r["T_distinguishable_eV"] for r in near]
    growing = all(a > b for a, b in zip(excess, excess[1:], strict=False))
    rising = all(e > 0 for e in excess) and growing
    out.gates.append(
        GateResult(
            "pauli_rise_monotone",
            rising,
            float(excess[0]) if excess else math.nan,
            0.0,
            "fermion excess over distinguishable grows as d falls below 2",
        )
    )
    out.gates.append(
        gate_below(
            "kinetic_quadrature_oracle",
            max((c["relative_error"] for c in checks), default=0.0),
            _tolerance(cfg, "kinetic_quadrature_oracle", 0.01),
        )
    )
    out.summary["T_fermion_smallest_d_eV"] = rows[0]["T_fermion_eV"] if rows else math.nan


@_scenario(ScenarioName.FIG3_FREE_DISTINGUISHABLE, "Free distinguishable pair energies")
def run_free_distinguishable(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    packets = cfg.packet_specs()
    potential = cfg.potential.build()
    snapshots = SnapshotWriter(out, cfg.export.snapshots, cfg.export.snapshot_member)
    ens = run_ensemble(
        cfg, packets, cfg.species_kind, potential, cfg.grid.build(), on_record=snapshots
    )
    breakdowns = ensemble_energies(ens, potential, cfg.unit_system)
    out.table("energies.csv", _energy_rows(breakdowns))
    out.table("trajectories.csv", _trajectory_rows(ens))

    expected = ensemble_kinetic_energy(packets, Species.DISTINGUISHABLE)
    totals = np.array([b.total for b in breakdowns])
    drift = float(np.abs(totals - expected).max() / expected)
    out.gates.append(
        gate_below(
            "total_energy_constant",
            drift,
            _tolerance(cfg, "total_energy_constant", 0.02),
            f"expected {expected:.4f} eV",
        )
    )
    final = breakdowns[-1]
    out.summary.update(
        {
            "expected_total_eV": expected,
            "final_total_eV": final.total,
            **{f"final_K{j + 1}_eV": float(k) for j, k in enumerate(final.k_per_particle)},
            **_members_note(cfg),
        }
    )


@_scenario(ScenarioName.FIG6_FERMION_BOSON_TRAJECTORIES, "Diagonal non-crossing for both species")
def run_fermion_boson_trajectories(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    packets = cfg.packet_specs()
    potential = cfg.potential.build()
    grid = cfg.grid.build()
    rows = []
    for species in (Species.FERMION, Species.BOSON):
        ens = run_ensemble(cfg, packets, species, potential, grid)
        changes = ens.diagonal_sign_changes()
        rows.append(
            {
                "species": str(species),
                "members": ens.n_members,
                "sign_changes": changes,
                "min_gap_nm": ens.min_gap(),
            }
        )
        out.table(f"trajectories_{species}.csv", _trajectory_rows(ens))
        out.gates.append(gate_below(f"non_crossing_{species}", changes, 0))
    out.table("crossings.csv", rows)
    out.summary.update(_members_note(cfg))


def _kinetic_dip(breakdowns: Sequence[EnergyBreakdown]) -> tuple[float, float, float]:
    """Smallest particle-averaged ⟨K⟩ with its standard error and time."""
    mean_k = np.array([b.k_per_particle.mean() for b in breakdowns])
    i = int(np.argmin(mean_k))
    error = float(np.sqrt(np.mean(breakdowns[i].k_error**2)))
    return float(mean_k[i]), error, breakdowns[i].time


@_scenario(ScenarioName.FIG7_ENERGIES, "Kinetic and quantum energy exchange near the diagonal")
def run_energies(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    packets = cfg.packet_specs()
    potential = cfg.potential.build()
    grid = cfg.grid.build()
    dips = {}
    for species in (Species.FERMION, Species.BOSON):
        ens = run_ensemble(cfg, packets, species, potential, grid)
        breakdowns = ensemble_energies(ens, potential, cfg.unit_system)
        out.table(f"energies_{species}.csv", _energy_rows(breakdowns))
        dips[species] = _kinetic_dip(breakdowns)
    out.table(
        "dips.csv",
        [
            {"species": str(s), "K_dip_eV": k, "K_dip_error_eV": e, "time_fs": t}
            for s, (k, e, t) in dips.items()
        ],
    )

    tolerance = _tolerance(cfg, "kinetic_dip", 0.2)
    for species, reference in ((Species.FERMION, FERMION_DIP_EV), (Species.BOSON, BOSON_DIP_EV)):
        value = dips[species][0]
        out.gates.append(
            gate_below(
                f"kinetic_dip_{species}",
                abs(value - reference) / reference,
                tolerance,
                f"dip {value:.4f} eV against {reference} eV",
            )
        )
    (k_f, e_f, _), (k_b, e_b, _) = dips[Species.FERMION], dips[Species.BOSON]
    separation = (k_f - k_b) / math.hypot(e_f, e_b) if math.hypot(e_f, e_b) > 0 else math.inf
    out.gates.append(
        GateResult(
            "boson_dip_below_fermion",
            separation >= SEPARATION_SIGMAS,
            separation,
            SEPARATION_SIGMAS,
            "standard errors",
        )
    )
    out.summary.update({"dip_fermion_eV": k_f, "dip_boson_eV": k_b, **_members_note(cfg)})


def _kinetic_series(breakdowns: Sequence[EnergyBreakdown]) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.array([b.k_per_particle for b in breakdowns]),
        np.array([b.k_error for b in breakdowns]),
    )


def _harmonic_comparison(cfg: ScenarioConfig, out: ScenarioOutcome, exchange: bool) -> None:
    """Conditional-field ensemble against the exact 2D ensemble from the same starts."""
    packets = cfg.packet_specs()
    if len(packets) != 2:
        raise ConfigError("the exact 2D comparison needs exactly two packets")
    species = cfg.species_kind
    potential = cfg.potential.build()
    units = cfg.unit_system
    snapshots = SnapshotWriter(out, cfg.export.snapshots, cfg.export.snapshot_member)

    conditional = run_ensemble(
        cfg, packets, species, potential, cfg.grid.build(), on_record=snapshots
    )
    psi = build_manybody_2d(packets[0], packets[1], species, cfg.grid2d.build())
    exact_snapshots = SnapshotWriter(out, cfg.export.snapshots)
    potential_2d = Potential2D.from_pair(potential, identical=species.identical)
    psi_t, exact = evolve_exact_2d(
        psi,
        potential_2d,
        cfg.propagator(),
        conditional.positions[0],
        cfg.n_steps,
        cfg.propagation.record_every,
        on_record=exact_snapshots,
    )

    e_cond = ensemble_energies(conditional, potential, units)
    e_exact = ensemble_energies(exact, potential, units)
    out.table("energies_conditional.csv", _energy_rows(e_cond))
    out.table("energies_exact.csv", _energy_rows(e_exact))

    n = min(len(e_cond), len(e_exact))
    k_cond, se_cond = _kinetic_series(e_cond[:n])
    k_exact, _ = _kinetic_series(e_exact[:n])
    out.table(
        "comparison.csv",
        [
            {
                "time_fs": e_cond[i].time,
                "K1_conditional_eV": float(k_cond[i, 0]),
                "K1_exact_eV": float(k_exact[i, 0]),
                "K2_conditional_eV": float(k_cond[i, 1]),
                "K2_exact_eV": float(k_exact[i, 1]),
            }
            for i in range(n)
        ],
    )

    rms = np.sqrt(np.mean((k_cond - k_exact) ** 2, axis=0) / np.mean(k_exact**2, axis=0))
    out.gates.append(
        gate_below(
            "exact_oracle_rms",
            float(rms.max()),
            _tolerance(cfg, "exact_oracle_rms", 0.15 if exchange else 0.05),
            "relative RMS of <K_j>(t) against the exact 2D ensemble",
        )
    )
    deviation = np.abs(conditional.positions[:n] - exact.positions[:n]).max(axis=(0, 2))
    final = psi_t.normalized()
    out.summary.update(
        {
            **{
                f"exact_final_T{j}_eV": expectation(
                    final, Observable.KINETIC, units=units, particle=j
                )
                for j in (1, 2)
            },
            "exact_final_H_eV": expectation(final, Observable.HAMILTONIAN, potential_2d, units),
            "rms_K1": float(rms[0]),
            "rms_K2": float(rms[1]),
            "median_trajectory_deviation_nm": float(np.median(deviation)),
            **_members_note(cfg),
        }
    )
    if exchange:
        bound = SEPARATION_SIGMAS * np.hypot(se_cond[:, 0], se_cond[:, 1])
        gap = np.abs(k_cond[:, 0] - k_cond[:, 1])
        worst = float(np.max(gap / np.where(bound > 0, bound, np.inf)))
        out.gates.append(
            gate_below(
                "indistinguishability",
                worst,
                1.0,
                "|<K1>-<K2>| over three combined standard errors",
            )
        )


@_scenario(
    ScenarioName.FIG11_12_HARMONIC_NO_EXCHANGE,
    "Harmonic coupling without exchange: conditional fields vs exact 2D",
)
def run_harmonic_no_exchange(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    _harmonic_comparison(cfg, out, exchange=False)


@_scenario(
    ScenarioName.FIG13_14_HARMONIC_EXCHANGE,
    "Harmonic coupling with exchange: conditional fields vs exact 2D",
)
def run_harmonic_exchange(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    _harmonic_comparison(cfg, out, exchange=True)


def _batch_error(current: np.ndarray, batches: int = CURRENT_BATCHES) -> float:
    """Standard error of the mean current from non-overlapping batch means."""
    usable = current.size // batches * batches
    if usable == 0:
        return math.nan
    means = current[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


def _sweep(cfg: ScenarioConfig) -> list[TransportResult]:
    transport = cfg.transport
    return run_sweep(
        cfg.device,
        transport.interaction_flags(),
        transport.biases,
        transport.t_total,
        cfg.seed,
        transport.settings(),
    )


def _sigmas(value: float, error: float) -> float:
    if error > 0:
        return value / error
    return 0.0 if value == 0 else math.copysign(math.inf, value)


def transport_iv_gates(
    currents: dict[tuple[float, Interaction], CurrentPoint],
    dwell: dict[tuple[float, Interaction], DwellStatistics],
    dwell_bias: float = DWELL_DD_BIAS,
) -> list[GateResult]:
    """Ordinal checks of a bias sweep.

    ``currents`` maps (bias, interaction) to the mean current and its standard error,
    ``dwell`` maps the same keys to dwell statistics. Gates whose inputs are missing from
    the sweep are not produced.
    """
    wi, ci, ei, cei = Interaction.WI, Interaction.CI, Interaction.EI, Interaction.CEI
    biases = sorted({b for b, _ in currents} | {b for b, _ in dwell})
    gates: list[GateResult] = []

    for bias in biases:
        if bias <= 0 or (bias, wi) not in currents or (bias, ci) not in currents:
            continue
        (i_wi, e_wi), (i_ci, e_ci) = currents[(bias, wi)], currents[(bias, ci)]
        separation = _sigmas(i_wi - i_ci, math.hypot(e_wi, e_ci))
        gates.append(
            GateResult(
                f"coulomb_lowers_current_{bias:g}V",
                bool(separation >= SEPARATION_SIGMAS),
                float(separation),
                SEPARATION_SIGMAS,
                "standard errors between WI and CI",
            )
        )

    if (0.0, wi) in currents:
        mean, error = currents[(0.0, wi)]
        offset = abs(_sigmas(mean, error))
        gates.append(
            gate_below(
                "zero_bias_current_WI",
                offset,
                SEPARATION_SIGMAS,
                f"<I>={mean:.3e} e/fs, standard error {error:.3e}",
            )
        )

    wi_points = [(b, currents[(b, wi)]) for b in biases if (b, wi) in currents]
    if len(wi_points) > 1:
        steps = [
            _sigmas(i_hi - i_lo, math.hypot(e_lo, e_hi))
            for (_, (i_lo, e_lo)), (_, (i_hi, e_hi)) in zip(wi_points, wi_points[1:])
        ]
        worst = min(steps)
        gates.append(
            GateResult(
                "wi_current_monotone",
                bool(worst >= -SEPARATION_SIGMAS),
                float(worst),
                -SEPARATION_SIGMAS,
                f"smallest step between {len(wi_points)} biases, in standard errors",
            )
        )

    for bias in biases:
        keys = [(bias, flag) for flag in (wi, ci, ei, cei)]
        if bias <= 0 or not all(key in currents for key in keys):
            continue
        (i_wi, e_wi), (i_ci, e_ci), (i_ei, e_ei), (i_cei, e_cei) = (currents[k] for k in keys)
        exchange_alone = abs(i_ei - i_wi)
        exchange_screened = abs(i_cei - i_ci)
        margin = _sigmas(exchange_alone - exchange_screened, math.hypot(e_wi, e_ci, e_ei, e_cei))
        gates.append(
            GateResult(
                f"exchange_screening_{bias:g}V",
                bool(exchange_screened < exchange_alone),
                float(margin),
                0.0,
                f"|CEI-CI|={exchange_screened:.3e}, |EI-WI|={exchange_alone:.3e} e/fs, "
                "margin in standard errors",
            )
        )

    reflected = {
        flag: stats.s_s + stats.d_d for (bias, flag), stats in dwell.items() if bias == 0
    }
    if ei in reflected and wi in reflected:
        gates.append(
            GateResult(
                "exchange_reflection_zero_bias",
                bool(reflected[ei] > 0 and reflected[wi] == 0),
                float(reflected[ei]),
                0.0,
                f"WI reflected share {reflected[wi]:.3g}",
            )
        )

    drain_side = {
        flag: stats.d_d
        for (bias, flag), stats in dwell.items()
        if math.isclose(bias, dwell_bias, abs_tol=1e-9)
    }
    if ei in drain_side and ci in drain_side:
        gates.append(
            GateResult(
                f"exchange_dwell_dd_{dwell_bias:g}V",
                bool(drain_side[ei] > drain_side[ci]),
                float(drain_side[ei]),
                float(drain_side[ci]),
                "EI drain-to-drain share against CI",
            )
        )
    return gates


@_scenario(ScenarioName.TRANSPORT_IV, "Mean current and dwell statistics against bias")
def run_transport_iv(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    results = _sweep(cfg)
    currents: dict[tuple[float, Interaction], CurrentPoint] = {}
    iv_rows, dwell_rows = [], []
    for result in results:
        trimmed = result.current.trimmed(cfg.transport.transient)
        mean, error = trimmed.mean_current, _batch_error(trimmed.current)
        currents[(result.bias, result.interaction)] = (mean, error)
        row = result.summary_row()
        row["mean_current_e_per_fs"] = mean
        row["current_error_e_per_fs"] = error
        iv_rows.append(row)
        dwell_rows.append(
            {
                "bias_V": result.bias,
                "interaction": str(result.interaction),
                **result.dwell.as_dict(),
            }
        )
    out.table("iv.csv", iv_rows)
    out.table("dwell.csv", dwell_rows, DWELL_COLUMNS)

    dwell = {(result.bias, result.interaction): result.dwell for result in results}
    out.gates.extend(transport_iv_gates(currents, dwell))
    out.summary["points"] = len(results)
    out.summary["transient_fs"] = cfg.transport.transient


@_scenario(ScenarioName.TRANSPORT_NOISE, "Current noise spectra and Fano factors")
def run_transport_noise(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    results = _sweep(cfg)
    f_min = cfg.noise.peak_min_thz / 1000.0
    threshold = _tolerance(cfg, "psd_peak_prominence", 3.0)
    fano_rows = []
    for result in results:
        acf = autocorrelation(result.current, cfg.noise.max_lag, cfg.transport.transient)
        spectrum = power_spectrum(acf, strict=cfg.noise.strict)
        out.table(f"psd_{result.interaction}_{result.bias:g}V.csv", spectrum.rows())
        f_peak, height = spectral_peak(spectrum, f_min)
        floor = float(np.median(spectrum.psd[spectrum.frequencies >= f_min]))
        prominence = height / floor if floor > 0 else math.inf
        fano_rows.append(
            {
                "bias_V": result.bias,
                "interaction": str(result.interaction),
                **spectrum.summary(),
                "peak_THz": f_peak * 1000.0,
                "peak_prominence": prominence,
            }
        )
        if result.bias > 0:
            expect_peak = not result.interaction.coulomb
            out.gates.append(
                GateResult(
                    f"psd_peak_{result.interaction}_{result.bias:g}V",
                    bool((prominence >= threshold) == expect_peak),
                    float(prominence),
                    threshold,
                    "peak expected" if expect_peak else "no peak expected",
                )
            )
    out.table("fano.csv", fano_rows)
    out.summary["points"] = len(results)


@_scenario(ScenarioName.TRANSPORT_POPULATION, "Sustained in-flight population and its wall time")
def run_transport_population(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    pop, transport = cfg.population, cfg.transport
    device = replace(cfg.device, bias=pop.bias)
    simulation = TransportSimulation(
        device, Interaction(pop.interaction), transport.settings(), cfg.seed
    )
    trace: list[dict[str, object]] = []
    settled: list[int] = []
    next_sample = 0.0

    def sample(t: float, population: int) -> None:
        nonlocal next_sample
        if t > transport.transient:
            settled.append(population)
        if t >= next_sample:
            trace.append({"time_fs": t, "population": population})
            next_sample += pop.trace_every

    started = time.monotonic()
    result = simulation.run(transport.t_total, on_progress=sample)
    elapsed = time.monotonic() - started
    out.table("population.csv", trace, ("time_fs", "population"))

    sustained = float(np.mean(settled)) if settled else 0.0
    shortfall = abs(sustained - pop.target) / pop.target
    out.gates.append(
        gate_below(
            "population_sustained",
            shortfall,
            _tolerance(cfg, "population_sustained", pop.tolerance),
            f"mean {sustained:.2f} in flight after {transport.transient:g} fs, "
            f"target {pop.target:g}",
        )
    )
    out.gates.append(
        gate_below(
            "population_wall_time",
            elapsed,
            _tolerance(cfg, "population_wall_time", pop.wall_budget_s),
            f"{transport.t_total:g} fs simulated, seconds",
        )
    )
    out.summary.update(
        {
            **result.summary_row(),
            "sustained_population": sustained,
            "simulated_fs": transport.t_total,
            "wall_time_s": elapsed,
        }
    )


@_scenario(ScenarioName.APPENDIXB_SPIN_CHECK, "Mixed-spin norm against its factorized form")
def run_spin_check(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    check = cfg.spin_check
    units = cfg.unit_system
    seeds = np.random.SeedSequence(cfg.seed).generate_state(2 * len(check.distances))
    rows = []
    for i, d in enumerate(check.distances):
        triple = packet_triple(d, 0.0, 0.0, check.sigma_x, units)
        half = (d + 8.0) * check.sigma_x
        grid = Grid1D(-half, half, SPIN_GRID_POINTS)
        up = sample_symmetrized(triple[:1], Species.FERMION, grid, check.samples, int(seeds[2 * i]))
        down = sample_symmetrized(
            triple[1:], Species.FERMION, grid, check.samples, int(seeds[2 * i + 1])
        )
        error = spin_factorization_error(triple, np.column_stack([up, down]))
        rows.append({"d": d, "max_relative_error": error, "samples": check.samples})
    out.table("spin_check.csv", rows, SPIN_CHECK_COLUMNS)

    far = [r["max_relative_error"] for r in rows if r["d"] >= 4.0]
    if far:
        out.gates.append(
            gate_below(
                "spin_factorization",
                max(far),
                _tolerance(cfg, "spin_factorization", 1e-3),
                "d >= 4",
            )
        )


@_scenario(ScenarioName.PROPERTY_SUITE, "Invariant checks of every module at reduced size")
def run_property_suite(cfg: ScenarioConfig, out: ScenarioOutcome) -> None:
    results = property_suite(cfg.seed)
    out.table("properties.csv", [r.row() for r in results])
    out.gates.extend(results)
    out.summary["checks"] = len(results)


def _resolution_warnings(
    label: str, k_max: float, dx: float, dt: float, units: UnitSystem
) -> list[str]:
    warnings = []
    advance = units.energy(k_max) * dt / units.hbar
    if advance > PHASE_ADVANCE_LIMIT:
        warnings.append(
            f"{label}: phase advance {advance:.2f} rad per step at k={k_max:.3g}/nm "
            f"exceeds pi/4; reduce dt"
        )
    if k_max * dx > KDX_LIMIT:
        warnings.append(
            f"{label}: k_max*dx = {k_max * dx:.2f} exceeds {KDX_LIMIT}; refine the grid"
        )
    return warnings


def check_config(cfg: ScenarioConfig) -> list[str]:
    """Physical sanity checks that need no run; returns the warnings it logged.

    Raises GridTooNarrow when a packet does not fit ±6σ inside its grid.
    """
    warnings: list[str] = []
    name = cfg.name
    if name in PACKET_SCENARIOS:
        specs = cfg.packet_specs()
        if not specs:
            raise ConfigError(f"scenario {name} needs at least one packet")
        grids = [("grid", cfg.grid.build())]
        if name in EXACT_2D_SCENARIOS:
            grids.append(("grid2d", cfg.grid2d.build()))
        for label, grid in grids:
            for i, spec in enumerate(specs):
                if not spec.fits(grid):
                    raise GridTooNarrow(
                        f"packet {i} (x0={spec.x0:g} nm, sigma={spec.sigma_x:g} nm) does not "
                        f"fit inside {label} [{grid.x_min:g}, {grid.x_max:g}]"
                    )
            k_max = max(abs(s.k0) + MOMENTUM_SIGMAS * s.sigma_k for s in specs)
            warnings += _resolution_warnings(
                label, k_max, grid.dx, cfg.propagation.dt, cfg.unit_system
            )
    if name in TRANSPORT_SCENARIOS:
        device, settings = cfg.device, cfg.transport.settings()
        warnings += _resolution_warnings(
            "transport", device.k_max(), settings.dx, settings.dt, device.units
        )
        if name is ScenarioName.TRANSPORT_NOISE:
            usable = cfg.transport.t_total - cfg.transport.transient
            if usable < 10 * cfg.noise.max_lag:
                warnings.append(
                    f"noise record of {usable:g} fs is shorter than ten times max_lag "
                    f"({cfg.noise.max_lag:g} fs)"
                )
        settled = cfg.transport.transient < cfg.transport.t_total
        if name is ScenarioName.TRANSPORT_POPULATION and not settled:
            warnings.append(
                f"population transient {cfg.transport.transient:g} fs leaves no settled samples "
                f"in {cfg.transport.t_total:g} fs"
            )
    for warning in warnings:
        logger.warning(warning)
    return warnings


def run_scenario(cfg: ScenarioConfig) -> ScenarioOutcome:
    """Run the configured scenario and write its artifacts and manifest."""
    check_config(cfg)
    scenario = SCENARIOS[cfg.name]
    outcome = ScenarioOutcome(cfg.name, cfg.output_path(), gates_enabled=cfg.gates.enabled)
    outcome.output_dir.mkdir(parents=True, exist_ok=True)
    logger.info("running %s (seed %d) into %s", cfg.name, cfg.seed, outcome.output_dir)
    scenario.runner(cfg, outcome)
    outcome.write_manifest(cfg)
    failed = outcome.failed_gates
    if failed:
        logger.warning("%d gate(s) failed: %s", len(failed), ", ".join(g.name for g in failed))
    return outcome
