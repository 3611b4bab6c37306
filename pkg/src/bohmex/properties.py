"""Reduced-size invariant checks run by the property_suite scenario."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, chisquare

from bohmex.analytic import ensemble_kinetic_energy, grid_kinetic_energy
from bohmex.bohm.energies import ensemble_energies
from bohmex.bohm.exact2d import evolve_exact_2d
from bohmex.exchange.conditional import (
    ConditionalSet,
    evaluate_conditional,
    init_conditional_set,
    occupied_node_residual,
    sample_symmetrized,
)
from bohmex.exchange.evolve import SwapStatus, evolve_system, swap_symmetry_check
from bohmex.exchange.spin import spin_factorization_error
from bohmex.grid import Grid1D
from bohmex.linalg import cofactors, permutations_with_parity, symmetrized_product
from bohmex.noise import autocorrelation, power_spectrum
from bohmex.packets import (
    GaussianPacketSpec,
    Species,
    build_manybody_2d,
    build_packet,
    packet_triple,
)
from bohmex.tdse.potentials import Potential1D, Potential2D
from bohmex.tdse.propagator import PropagatorConfig, step_1d
from bohmex.transport.device import Contact, DeviceConfig
from bohmex.transport.injection import InjectionCell, injection_attempts, injection_times

logger = logging.getLogger(__name__)


@dataclass
class GateResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def row(self) -> dict[str, object]:
        return {
            "check": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


def gate_below(name: str, value: float, threshold: float, detail: str = "") -> GateResult:
    return GateResult(name, bool(value <= threshold), float(value), threshold, detail)


SMALL_GRID = Grid1D(-150.0, 150.0, 1201)
SMALL_STEP = PropagatorConfig(dt=0.5)


def _pair(k: float = 1.0) -> list[GaussianPacketSpec]:
    return [GaussianPacketSpec(-40.0, k, 10.0), GaussianPacketSpec(40.0, -k, 10.0)]


def _triple(k: float = 1.0) -> list[GaussianPacketSpec]:
    return [*_pair(k), GaussianPacketSpec(0.0, 0.3, 10.0)]


def _symmetrized_slice(
    orbitals: np.ndarray, positions: np.ndarray, a: int, species: Species
) -> np.ndarray:
    """Ψ(r_1..x..r_N) on the grid by the explicit permutation sum, x in slot ``a``."""
    n = orbitals.shape[0]
    at = np.array(
        [[SMALL_GRID.interpolate(row, positions[k]) for k in range(n)] for row in orbitals]
    )
    total = np.zeros(SMALL_GRID.n_points, dtype=np.complex128)
    for perm, parity in permutations_with_parity(n):
        factor = species.permutation_sign(parity)
        for k in range(n):
            if k != a:
                factor = factor * at[perm[k], k]
        total = total + factor * orbitals[perm[a]]
    return total


def check_cofactor_assembly(seed: int) -> GateResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3, 4):
        for species in (Species.FERMION, Species.BOSON):
            T = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            C = cofactors(T, species)
            reference = symmetrized_product(T, species)
            for a in range(n):
                expanded = np.sum(T[:, a] * C[:, a])
                worst = max(worst, abs(expanded - reference) / abs(reference))
    return gate_below("cofactor_assembly", worst, 1e-12, "N=2..4, fermion and boson")


def _evolved_free_set(packets: list[GaussianPacketSpec], seed: int, n_steps: int):
    cset = init_conditional_set(packets, Species.FERMION, SMALL_GRID, m=3, seed=seed)
    cset, _ = evolve_system(cset, Potential1D.free(), SMALL_STEP, n_steps)
    return cset


def check_separable_limit(seed: int) -> GateResult:
    worst = 0.0
    n_steps = 40
    for packets in (_pair(), _triple()):
        cset = _evolved_free_set(packets, seed, n_steps)
        orbitals = []
        for spec in packets:
            psi = build_packet(spec, SMALL_GRID)
            for _ in range(n_steps):
                psi = step_1d(psi, Potential1D.free(), SMALL_STEP)
            orbitals.append(psi.amplitudes)
        orbitals = np.array(orbitals)
        for a in range(len(packets)):
            exact = _symmetrized_slice(orbitals, cset.positions[0], a, Species.FERMION)
            exact = exact / np.sqrt(np.sum(np.abs(exact) ** 2) * SMALL_GRID.dx)
            assembled = evaluate_conditional(cset, a, SMALL_GRID.x)
            assembled = assembled / np.sqrt(np.sum(np.abs(assembled) ** 2) * SMALL_GRID.dx)
            worst = max(worst, float(np.abs(assembled - exact).max()))
    return gate_below("separable_limit", worst, 1e-8, "free space, N=2 and N=3 fermions")


def check_separable_trajectories(
    seed: int, members: int = 100, n_steps: int = 1000, grid: Grid1D = SMALL_GRID
) -> GateResult:
    """Conditional fermion-pair trajectories against those of the exact 2D Slater field.

    Both runs share grid, time step and starts. In free space the two descriptions are
    the same field, so the positions agree up to rounding.
    """
    packets, free = _pair(), Potential1D.free()
    start = sample_symmetrized(packets, Species.FERMION, grid, members, seed)
    cset = init_conditional_set(packets, Species.FERMION, grid, initial_positions=start)
    _, conditional = evolve_system(cset, free, SMALL_STEP, n_steps)
    psi = build_manybody_2d(packets[0], packets[1], Species.FERMION, grid)
    _, exact = evolve_exact_2d(
        psi, Potential2D.from_pair(free, identical=True), SMALL_STEP, start, n_steps
    )
    error = float(np.abs(conditional.positions - exact.positions).max())
    return gate_below(
        "separable_trajectories",
        error,
        0.1,
        f"free fermion pair, {members} starts over {n_steps * SMALL_STEP.dt:g} fs, nm",
    )


def check_occupied_nodes(seed: int, n_steps: int = 40) -> GateResult:
    """Worst fermion node residual over every step of an interacting N=3 evolution."""
    cset = init_conditional_set(
        _triple(), Species.FERMION, SMALL_GRID, m=2, seed=seed, per_member=True
    )
    residuals: list[float] = []

    def record(state: ConditionalSet) -> None:
        residuals.append(occupied_node_residual(state))

    evolve_system(cset, Potential1D.harmonic_pair(1e-4), SMALL_STEP, n_steps, on_record=record)
    return gate_below(
        "fermion_occupied_nodes",
        max(residuals),
        1e-10,
        f"N=3 harmonic pair c=1e-4, {len(residuals)} steps, rule {cset.phase_rule}",
    )


def check_swap_symmetry(seed: int, members: int = 100, n_steps: int = 40) -> list[GateResult]:
    """Interchange check over ``members`` sampled starts per case, each paired with its mirror."""
    results = []
    cases = [
        ("swap_symmetry_n2_free", _pair(), Potential1D.free(), Species.FERMION),
        ("swap_symmetry_n3_harmonic", _triple(), Potential1D.harmonic_pair(1e-4), Species.FERMION),
        ("swap_symmetry_distinguishable", _pair(), Potential1D.free(), Species.DISTINGUISHABLE),
    ]
    for name, packets, potential, species in cases:
        start = sample_symmetrized(packets, species, SMALL_GRID, members, seed)

        def builder(X, packets=packets, species=species, per_member=potential.depends_on_context):
            return init_conditional_set(
                packets, species, SMALL_GRID, initial_positions=X, per_member=per_member
            )

        report = swap_symmetry_check(builder, start, potential, SMALL_STEP, n_steps)
        expected_status = SwapStatus.PASS if species.identical else SwapStatus.NOT_APPLICABLE
        results.append(
            GateResult(
                name,
                report.status is expected_status,
                report.max_deviation,
                report.tolerance,
                f"{report.status}, {start.shape[0]} mirrored pairs",
            )
        )
    return results


def check_non_crossing(seed: int) -> list[GateResult]:
    results = []
    for species in (Species.FERMION, Species.BOSON):
        cset = init_conditional_set(_pair(2.0), species, SMALL_GRID, m=200, seed=seed)
        _, ens = evolve_system(cset, Potential1D.free(), SMALL_STEP, 300, record_every=2)
        crossings = ens.diagonal_sign_changes()
        results.append(
            gate_below(f"non_crossing_{species}", crossings, 0, f"min gap {ens.min_gap():.3g} nm")
        )
    return results


def check_energy_conservation(seed: int) -> GateResult:
    cset = init_conditional_set(_pair(), Species.DISTINGUISHABLE, SMALL_GRID, m=400, seed=seed)
    _, ens = evolve_system(cset, Potential1D.free(), SMALL_STEP, 100, record_every=10)
    breakdowns = ensemble_energies(ens, Potential1D.free(), cset.packets[0].units)
    totals = np.array([e.total for e in breakdowns])
    drift = float(np.abs(totals - totals[0]).max() / abs(totals[0]))
    return gate_below("ensemble_energy_conservation", drift, 0.02, "distinguishable free pair")


def check_unitarity() -> list[GateResult]:
    psi0 = build_packet(GaussianPacketSpec(0.0, 1.0, 10.0), SMALL_GRID)
    psi = psi0
    for _ in range(1000):
        psi = step_1d(psi, Potential1D.free(), SMALL_STEP)
    norm_error = abs(psi.norm() - psi0.norm())
    for _ in range(1000):
        psi = step_1d(psi, Potential1D.free(), SMALL_STEP, direction=-1)
    back = float(np.abs(psi.amplitudes - psi0.amplitudes).max())
    return [
        gate_below("norm_conservation", norm_error, 1e-10, "1000 hard-wall steps"),
        gate_below("time_reversibility", back, 1e-8, "1000 steps forward and back"),
    ]


def check_injection_statistics(seed: int) -> list[GateResult]:
    rng = np.random.default_rng(seed)
    device = DeviceConfig()
    cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=0.5)
    attempts, windows = 10, 10_000
    span = attempts * cell.t0
    counts = np.array(
        [
            len(injection_attempts(cell, (w * span, (w + 1) * span), rng, device))
            for w in range(windows)
        ]
    )
    observed = np.bincount(counts, minlength=attempts + 1)
    expected = windows * binom.pmf(np.arange(attempts + 1), attempts, cell.fermi_occupation)
    p_value = float(chisquare(observed, expected).pvalue)

    times = injection_times(
        InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=1.0), 5000.0, rng
    )
    spacing = float(np.diff(times).min())
    return [
        GateResult("injection_binomial_chi2", p_value > 0.01, p_value, 0.01, "p-value"),
        GateResult(
            "injection_min_spacing", spacing >= cell.t0 * (1 - 1e-12), spacing, cell.t0, "fs"
        ),
    ]


def check_noise_oracles(seed: int) -> list[GateResult]:
    rng = np.random.default_rng(seed)
    rate = 0.05
    poisson = rng.poisson(rate, 200_000).astype(float)
    spectrum = power_spectrum(autocorrelation(poisson, 50.0, dt=1.0))

    occupation, t0 = 0.3, 10.0
    cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=t0, fermi_occupation=occupation)
    cell.phase = 0.5
    times = injection_times(cell, 400_000.0, rng)
    thinned = np.bincount(times.astype(np.int64), minlength=400_000).astype(float)
    thinned_spectrum = power_spectrum(autocorrelation(thinned, 200.0, dt=1.0))
    expected = 1.0 - occupation
    return [
        gate_below("fano_poisson", abs(spectrum.fano - 1.0), 0.05, f"fano={spectrum.fano:.4f}"),
        gate_below(
            "fano_binomial_thinned",
            abs(thinned_spectrum.fano - expected) / expected,
            0.10,
            f"fano={thinned_spectrum.fano:.4f}, expected {expected:.2f}",
        ),
        gate_below("parseval", max(spectrum.parseval_error, thinned_spectrum.parseval_error), 0.02),
    ]


def check_kinetic_oracle() -> list[GateResult]:
    triple = packet_triple(1.0, 0.0, 0.0, 1.0)
    grid = Grid1D(-8.0, 8.0, 64)
    analytic = ensemble_kinetic_energy(triple, Species.FERMION)
    quadrature = grid_kinetic_energy(triple, Species.FERMION, grid)
    return [
        gate_below(
            "kinetic_quadrature_oracle",
            abs(analytic - quadrature) / analytic,
            0.01,
            f"analytic {analytic:.6g} eV",
        )
    ]


def check_spin_factorization(seed: int) -> GateResult:
    triple = packet_triple(4.0, 0.0, 0.0, 10.0)
    grid = Grid1D(-120.0, 120.0, 961)
    up = sample_symmetrized(triple[:1], Species.FERMION, grid, 500, seed)
    down = sample_symmetrized(triple[1:], Species.FERMION, grid, 500, seed + 1)
    error = spin_factorization_error(triple, np.column_stack([up, down]))
    return gate_below("spin_factorization_d4", error, 1e-3)


PROPERTIES: list[tuple[str, Callable[[int], GateResult | list[GateResult]]]] = [
    ("cofactor assembly", check_cofactor_assembly),
    ("separable limit", check_separable_limit),
    ("separable trajectories", check_separable_trajectories),
    ("occupied nodes", check_occupied_nodes),
    ("swap symmetry", check_swap_symmetry),
    ("non-crossing", check_non_crossing),
    ("energy conservation", check_energy_conservation),
    ("unitarity", lambda seed: check_unitarity()),
    ("injection statistics", check_injection_statistics),
    ("noise oracles", check_noise_oracles),
    ("kinetic oracle", lambda seed: check_kinetic_oracle()),
    ("spin factorization", check_spin_factorization),
]


def property_suite(
    seed: int = 0, on_progress: Callable[[str, int], None] | None = None
) -> list[GateResult]:
    """Run every invariant check and collect their results."""
    results: list[GateResult] = []
    for label, check in PROPERTIES:
        outcome = check(seed)
        batch = outcome if isinstance(outcome, list) else [outcome]
        results.extend(batch)
        failed = [r.name for r in batch if not r.passed]
        if failed:
            logger.warning("property check %s failed: %s", label, ", ".join(failed))
        if on_progress is not None:
            on_progress(label, len(batch))
    logger.info("property suite: %d/%d checks passed", sum(r.passed for r in results), len(results))
    return results
