"""End-to-end scenario runs against a temporary output directory."""

import csv
import json

import pytest

from bohmex.config import load_config_from_dict
from bohmex.scenarios import run_scenario


def _read_csv(path):
    with open(path) as f:
        return list(csv.DictReader(f))


class TestEndToEndKinetic:
    def test_kinetic_tables_and_gates(self, sample_config_dict):
        cfg = load_config_from_dict(sample_config_dict)
        outcome = run_scenario(cfg)
        out = cfg.output_path()

        rows = _read_csv(out / "kinetic.csv")
        assert len(rows) == 5
        assert set(rows[0]) == {
            "d",
            "d_measured",
            "T_fermion_eV",
            "T_boson_eV",
            "T_distinguishable_eV",
        }
        for row in rows:
            assert float(row["d_measured"]) == pytest.approx(float(row["d"]), rel=1e-6)
        nearest = rows[0]
        assert float(nearest["T_fermion_eV"]) > float(nearest["T_distinguishable_eV"])

        assert [g.name for g in outcome.gates] == [
            "pauli_far_limit",
            "pauli_rise_monotone",
            "kinetic_quadrature_oracle",
        ]
        assert outcome.passed

    def test_manifest(self, sample_config_dict):
        cfg = load_config_from_dict(sample_config_dict)
        run_scenario(cfg)
        manifest = json.loads((cfg.output_path() / "manifest.json").read_text())
        assert manifest["scenario"] == "fig1_kinetic_vs_d"
        assert manifest["seed"] == 3
        assert manifest["artifacts"] == ["kinetic.csv", "kinetic_check.csv"]
        assert manifest["passed"] is True
        assert manifest["config"]["kinetic"]["sigma_x"] == 1.0
        assert {g["check"] for g in manifest["gates"]} >= {"pauli_far_limit"}

    def test_tolerance_override_fails_gate(self, sample_config_dict):
        sample_config_dict["gates"] = {"tolerances": {"kinetic_quadrature_oracle": 0.0}}
        outcome = run_scenario(load_config_from_dict(sample_config_dict))
        assert not outcome.passed
        assert [g.name for g in outcome.failed_gates] == ["kinetic_quadrature_oracle"]

    def test_disabled_gates_always_pass(self, sample_config_dict):
        sample_config_dict["gates"] = {
            "enabled": False,
            "tolerances": {"kinetic_quadrature_oracle": 0.0},
        }
        outcome = run_scenario(load_config_from_dict(sample_config_dict))
        assert outcome.failed_gates
        assert outcome.passed


class TestEndToEndFreePair:
    def test_energies_trajectories_and_snapshots(self, free_pair_config_dict):
        cfg = load_config_from_dict(free_pair_config_dict)
        outcome = run_scenario(cfg)
        out = cfg.output_path()

        energies = _read_csv(out / "energies.csv")
        assert [float(r["time_fs"]) for r in energies] == [0.0, 2.5, 5.0, 7.5, 10.0]
        assert {"K1_eV", "K2_eV", "Q1_eV", "Q2_eV", "V_eV", "total_eV"} <= set(energies[0])

        trajectories = _read_csv(out / "trajectories.csv")
        assert len(trajectories) == 20 * 5
        assert float(trajectories[0]["x1_nm"]) > 0 > float(trajectories[0]["x2_nm"])

        for name in (
            "snapshot_t0.0_a1.bxwf",
            "snapshot_t0.0_a2.bxwf",
            "snapshot_t5.0_a1.bxwf",
            "snapshot_t5.0_a2.bxwf",
        ):
            assert (out / name).exists()
            assert name in outcome.artifacts
        assert [g.name for g in outcome.gates] == ["total_energy_constant"]
        assert outcome.passed
        assert outcome.summary["ensemble_members"] == 120


class TestEndToEndSpinCheck:
    def test_spin_check(self, tmp_path):
        cfg = load_config_from_dict(
            {
                "scenario": "appendixB_spin_check",
                "seed": 4,
                "output_dir": str(tmp_path / "spin"),
                "spin_check": {"distances": [1.0, 4.0], "samples": 200},
            }
        )
        outcome = run_scenario(cfg)
        rows = _read_csv(cfg.output_path() / "spin_check.csv")
        near, far = (float(r["max_relative_error"]) for r in rows)
        assert near > far
        assert [g.name for g in outcome.gates] == ["spin_factorization"]
        assert outcome.gates[0].value == pytest.approx(far, rel=1e-9)

    def test_no_gate_without_distant_packets(self, tmp_path):
        cfg = load_config_from_dict(
            {
                "scenario": "appendixB_spin_check",
                "output_dir": str(tmp_path / "spin"),
                "spin_check": {"distances": [2.0], "samples": 50},
            }
        )
        assert run_scenario(cfg).gates == []


class TestEndToEndTransportIv:
    def test_sweep_reports_every_ordering_gate(self, tmp_path):
        cfg = load_config_from_dict(
            {
                "scenario": "transport_iv",
                "seed": 5,
                "output_dir": str(tmp_path / "iv"),
                "transport": {
                    "biases": [0.0, 0.05],
                    "t_total": 60.0,
                    "transient": 10.0,
                    "dx": 1.0,
                    "dt": 0.5,
                    "n_cells": 4,
                    "population_cap": 16,
                },
            }
        )
        outcome = run_scenario(cfg)
        assert {g.name for g in outcome.gates} == {
            "coulomb_lowers_current_0.05V",
            "zero_bias_current_WI",
            "wi_current_monotone",
            "exchange_screening_0.05V",
            "exchange_reflection_zero_bias",
            "exchange_dwell_dd_0.05V",
        }
        rows = _read_csv(cfg.output_path() / "iv.csv")
        assert len(rows) == 8
        assert len(_read_csv(cfg.output_path() / "dwell.csv")) == 8


class TestEmptyTables:
    def test_header_written_without_rows(self, sample_config_dict):
        sample_config_dict["kinetic"]["check_distances"] = []
        cfg = load_config_from_dict(sample_config_dict)
        run_scenario(cfg)
        text = (cfg.output_path() / "kinetic_check.csv").read_text()
        assert text == "d,T_analytic_eV,T_quadrature_eV,relative_error\n"


class TestEndToEndTransportPopulation:
    def test_population_trace_and_gates(self, tmp_path):
        cfg = load_config_from_dict(
            {
                "scenario": "transport_population",
                "seed": 6,
                "output_dir": str(tmp_path / "pop"),
                "transport": {
                    "t_total": 60.0,
                    "transient": 10.0,
                    "dx": 1.0,
                    "dt": 0.5,
                    "n_cells": 4,
                    "population_cap": 16,
                },
                "population": {"target": 1.0, "tolerance": 20.0, "trace_every": 10.0},
            }
        )
        outcome = run_scenario(cfg)
        gates = {g.name: g for g in outcome.gates}
        assert set(gates) == {"population_sustained", "population_wall_time"}
        assert gates["population_sustained"].passed
        rows = _read_csv(cfg.output_path() / "population.csv")
        assert list(rows[0]) == ["time_fs", "population"]
        assert [float(r["time_fs"]) for r in rows] == [0.5, 10, 20, 30, 40, 50, 60]
        assert outcome.summary["interaction"] == "CEI"
        assert outcome.summary["simulated_fs"] == pytest.approx(60.0)
        assert outcome.summary["peak_population"] >= 0
        assert "mean_fields" in outcome.summary
