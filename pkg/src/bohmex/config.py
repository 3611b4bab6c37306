"""YAML scenario config loader with dataclass validation."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml

from bohmex.exchange.conditional import PhaseRule
from bohmex.grid import Grid1D
from bohmex.packets import GaussianPacketSpec, Species
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import Boundary, PropagatorConfig
from bohmex.transport.device import DeviceConfig, Interaction, TransportSettings
from bohmex.units import FREE_ELECTRON, UnitSystem

OUTPUT_ROOT_ENV = "BOHMEX_OUTPUT_ROOT"


class ScenarioName(StrEnum):
    FIG1_KINETIC_VS_D = "fig1_kinetic_vs_d"
    FIG3_FREE_DISTINGUISHABLE = "fig3_free_distinguishable"
    FIG6_FERMION_BOSON_TRAJECTORIES = "fig6_fermion_boson_trajectories"
    FIG7_ENERGIES = "fig7_energies"
    FIG11_12_HARMONIC_NO_EXCHANGE = "fig11_12_harmonic_no_exchange"
    FIG13_14_HARMONIC_EXCHANGE = "fig13_14_harmonic_exchange"
    TRANSPORT_IV = "transport_iv"
    TRANSPORT_NOISE = "transport_noise"
    APPENDIXB_SPIN_CHECK = "appendixB_spin_check"
    TRANSPORT_POPULATION = "transport_population"
    PROPERTY_SUITE = "property_suite"


@dataclass
class UnitsConfig:
    mass_eff_ratio: float = 1.0


@dataclass
class GridConfig:
    x_min: float = -300.0
    x_max: float = 300.0
    n_points: int = 2401

    def build(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, self.n_points)


@dataclass
class PacketConfig:
    """One packet; give either ``energy`` (eV) with ``direction`` or ``k0`` (1/nm)."""

    x0: float = 0.0
    energy: float | None = None
    k0: float | None = None
    direction: int = 1
    sigma_x: float = 25.0

    def spec(self, units: UnitSystem) -> GaussianPacketSpec:
        if self.k0 is not None:
            return GaussianPacketSpec(self.x0, self.k0, self.sigma_x, units)
        return GaussianPacketSpec.from_energy(
            self.x0, self.energy or 0.0, self.sigma_x, units, self.direction
        )


@dataclass
class PropagationConfig:
    dt: float = 0.5
    t_total: float = 600.0
    boundary: str = "hard"
    cap_strength: float = 0.05
    cap_width: float = 100.0
    record_every: int = 4


@dataclass
class EnsembleConfig:
    members: int = 4000
    chunk: int = 500
    phase_rule: str = "occupied-node"


@dataclass
class PotentialConfig:
    """``kind`` is free, harmonic or coulomb; the pair term acts between all particles."""

    kind: str = "free"
    harmonic_c: float = 0.0
    softening: float = 1.0
    epsilon_r: float = 1.0

    def build(self) -> Potential1D:
        if self.kind == "harmonic":
            return Potential1D.harmonic_pair(self.harmonic_c)
        if self.kind == "coulomb":
            return Potential1D.coulomb_soft(self.softening, self.epsilon_r)
        return Potential1D.free()


@dataclass
class TransportConfig:
    biases: list[float] = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.2])
    interactions: list[str] = field(default_factory=lambda: ["WI", "CI", "EI", "CEI"])
    t_total: float = 4000.0
    transient: float = 500.0
    dx: float = 0.4
    dt: float = 0.2
    n_cells: int = 32
    population_cap: int = 32
    current_bin: float = 1.0
    cap_strength: float = 0.05
    cap_width: float = 40.0
    workers: int = 1

    def settings(self) -> TransportSettings:
        return TransportSettings(
            dx=self.dx,
            dt=self.dt,
            n_cells=self.n_cells,
            population_cap=self.population_cap,
            current_bin=self.current_bin,
            cap_strength=self.cap_strength,
            cap_width=self.cap_width,
            workers=self.workers,
        )

    def interaction_flags(self) -> list[Interaction]:
        return [Interaction(name) for name in self.interactions]


@dataclass
class PopulationConfig:
    """Sustained-population run: one interaction flag at one bias for ``transport.t_total``."""

    interaction: str = "CEI"
    bias: float = 0.1
    target: float = 20.0
    tolerance: float = 0.25
    wall_budget_s: float = 14_400.0
    trace_every: float = 100.0


@dataclass
class NoiseConfig:
    max_lag: float = 200.0
    strict: bool = False
    peak_min_thz: float = 1.0


@dataclass
class KineticConfig:
    distances: list[float] = field(default_factory=lambda: [0.25 * i for i in range(1, 25)])
    check_distances: list[float] = field(default_factory=lambda: [0.5, 1.5, 4.0])
    x_center: float = 0.0
    k_center: float = 0.0
    sigma_x: float = 1.0
    quadrature_points: int = 64


@dataclass
class SpinCheckConfig:
    distances: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    samples: int = 2000
    sigma_x: float = 10.0


@dataclass
class GatesConfig:
    enabled: bool = True
    tolerances: dict[str, float] = field(default_factory=dict)


@dataclass
class ExportConfig:
    snapshots: list[float] = field(default_factory=list)
    snapshot_member: int = 0


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 0
    output_dir: str = ""
    species: str = "fermion"
    units: UnitsConfig = field(default_factory=UnitsConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    grid2d: GridConfig = field(default_factory=lambda: GridConfig(-250.0, 250.0, 512))
    packets: list[PacketConfig] = field(default_factory=list)
    propagation: PropagationConfig = field(default_factory=PropagationConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    device: DeviceConfig = field(default_factory=DeviceConfig)
    transport: TransportConfig = field(default_factory=TransportConfig)
    population: PopulationConfig = field(default_factory=PopulationConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    kinetic: KineticConfig = field(default_factory=KineticConfig)
    spin_check: SpinCheckConfig = field(default_factory=SpinCheckConfig)
    gates: GatesConfig = field(default_factory=GatesConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    @property
    def name(self) -> ScenarioName:
        return ScenarioName(self.scenario)

    @property
    def unit_system(self) -> UnitSystem:
        return FREE_ELECTRON.with_mass_ratio(self.units.mass_eff_ratio)

    @property
    def species_kind(self) -> Species:
        return Species(self.species)

    def packet_specs(self) -> list[GaussianPacketSpec]:
        return [p.spec(self.unit_system) for p in self.packets]

    def propagator(self) -> PropagatorConfig:
        prop = self.propagation
        return PropagatorConfig(
            dt=prop.dt,
            boundary=Boundary(prop.boundary),
            cap_strength=prop.cap_strength,
            cap_width=prop.cap_width,
            units=self.unit_system,
        )

    @property
    def n_steps(self) -> int:
        return round(self.propagation.t_total / self.propagation.dt)

    def output_path(self) -> Path:
        """``output_dir`` resolved against $BOHMEX_OUTPUT_ROOT when it is set."""
        out = Path(self.output_dir or f"./output/{self.scenario}")
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            return Path(root) / out
        return out

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class ConfigError(Exception):
    """Raised when a scenario config is invalid."""


_SECTIONS: dict[str, type] = {
    "units": UnitsConfig,
    "grid": GridConfig,
    "grid2d": GridConfig,
    "propagation": PropagationConfig,
    "ensemble": EnsembleConfig,
    "potential": PotentialConfig,
    "device": DeviceConfig,
    "transport": TransportConfig,
    "population": PopulationConfig,
    "noise": NoiseConfig,
    "kinetic": KineticConfig,
    "spin_check": SpinCheckConfig,
    "gates": GatesConfig,
    "export": ExportConfig,
}
_SCALARS = ("scenario", "seed", "output_dir", "species")


def _key_lines(node: yaml.Node, path: tuple = ()) -> dict[tuple, int]:
    """Map every mapping-key path to its 1-based line in the YAML source."""
    lines: dict[tuple, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key_path = (*path, key_node.value)
            lines[key_path] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, key_path))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            lines.update(_key_lines(item, (*path, i)))
    return lines


def _where(path: tuple, lines: dict[tuple, int]) -> str:
    dotted = ".".join(str(p) for p in path)
    line = lines.get(path)
    return f"'{dotted}' (line {line})" if line is not None else f"'{dotted}'"


def _build_nested(cls: type, data: Any, path: tuple, lines: dict[tuple, int]) -> Any:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {_where(path, lines)} must be a mapping")
    for key in data:
        if key not in cls.__dataclass_fields__:
            raise ConfigError(f"unknown key {_where((*path, key), lines)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section {_where(path, lines)}: {exc}") from exc


def _check_choice(value: str, choices: type[StrEnum], what: str, where: str) -> None:
    allowed = [str(c) for c in choices]
    if value not in allowed:
        raise ConfigError(f"{what} {value!r} at {where} is not one of {', '.join(allowed)}")


def _validate(cfg: ScenarioConfig, lines: dict[tuple, int]) -> None:
    _check_choice(cfg.scenario, ScenarioName, "scenario", _where(("scenario",), lines))
    _check_choice(cfg.species, Species, "species", _where(("species",), lines))
    _check_choice(
        cfg.propagation.boundary, Boundary, "boundary", _where(("propagation", "boundary"), lines)
    )
    _check_choice(
        cfg.ensemble.phase_rule, PhaseRule, "phase rule", _where(("ensemble", "phase_rule"), lines)
    )
    for i, name in enumerate(cfg.transport.interactions):
        where = _where(("transport", "interactions", i), lines)
        _check_choice(name, Interaction, "interaction", where)
    _check_choice(
        cfg.population.interaction,
        Interaction,
        "interaction",
        _where(("population", "interaction"), lines),
    )
    pop = cfg.population
    if pop.target <= 0 or pop.tolerance <= 0 or pop.wall_budget_s <= 0 or pop.trace_every <= 0:
        raise ConfigError("population target, tolerance, wall budget and trace_every must be > 0")
    if cfg.potential.kind not in ("free", "harmonic", "coulomb"):
        raise ConfigError(f"unknown potential kind {_where(('potential', 'kind'), lines)}")
    for i, packet in enumerate(cfg.packets):
        if (packet.energy is None) == (packet.k0 is None):
            where = _where(("packets", i), lines)
            raise ConfigError(f"packet {where} needs exactly one of energy, k0")
    if cfg.propagation.dt <= 0 or cfg.propagation.t_total <= 0:
        raise ConfigError("propagation dt and t_total must be positive")
    if cfg.ensemble.members < 1 or cfg.ensemble.chunk < 1:
        raise ConfigError("ensemble members and chunk must be at least 1")


def _from_mapping(raw: Any, lines: dict[tuple, int]) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("Config must be a YAML mapping")
    if "scenario" not in raw:
        raise ConfigError("Config missing required field: scenario")
    for key in raw:
        if key not in _SECTIONS and key not in _SCALARS and key != "packets":
            raise ConfigError(f"unknown key {_where((key,), lines)}")

    packets = raw.get("packets") or []
    if not isinstance(packets, list):
        raise ConfigError(f"{_where(('packets',), lines)} must be a list")
    scalars = {k: raw[k] for k in _SCALARS if k in raw}
    cfg = ScenarioConfig(
        **scalars,
        packets=[
            _build_nested(PacketConfig, p, ("packets", i), lines) for i, p in enumerate(packets)
        ],
        **{
            name: _build_nested(cls, raw.get(name), (name,), lines)
            for name, cls in _SECTIONS.items()
            if name in raw
        },
    )
    _validate(cfg, lines)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    """Load and validate a YAML scenario config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config is not valid YAML: {exc}") from exc
    return _from_mapping(raw, _key_lines(root) if root is not None else {})


def load_config_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    """Load and validate a scenario config from a dictionary."""
    return _from_mapping(data, {})
