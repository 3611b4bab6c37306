"""Tests for the invariant checks behind the property_suite scenario."""

import pytest

from bohmex import properties
from bohmex.grid import Grid1D
from bohmex.properties import (
    GateResult,
    check_cofactor_assembly,
    check_injection_statistics,
    check_kinetic_oracle,
    check_occupied_nodes,
    check_separable_trajectories,
    check_swap_symmetry,
    check_unitarity,
    gate_below,
    property_suite,
)


class TestGateBelow:
    def test_pass_and_fail(self):
        assert gate_below("g", 0.5, 1.0).passed
        assert not gate_below("g", 1.5, 1.0).passed
        assert gate_below("g", 1.0, 1.0).passed

    def test_row(self):
        row = gate_below("drift", 0.01, 0.02, "free pair").row()
        assert row == {
            "check": "drift",
            "passed": True,
            "value": 0.01,
            "threshold": 0.02,
            "detail": "free pair",
        }


class TestChecks:
    def test_cofactor_assembly(self):
        result = check_cofactor_assembly(0)
        assert result.passed
        assert result.value < 1e-12

    def test_kinetic_oracle(self):
        [result] = check_kinetic_oracle()
        assert result.passed

    def test_unitarity(self):
        norm, reversal = check_unitarity()
        assert norm.name == "norm_conservation"
        assert norm.passed
        assert reversal.passed

    def test_occupied_nodes_checked_every_step_with_pair_potential(self):
        result = check_occupied_nodes(0, n_steps=10)
        assert result.name == "fermion_occupied_nodes"
        assert result.passed
        assert "11 steps" in result.detail
        assert "occupied-node" in result.detail

    def test_separable_trajectories_match_exact_field(self):
        result = check_separable_trajectories(
            0, members=10, n_steps=100, grid=Grid1D(-120.0, 120.0, 481)
        )
        assert result.name == "separable_trajectories"
        assert result.passed
        assert result.value < 1e-4
        assert result.threshold == pytest.approx(0.1)

    def test_swap_symmetry_over_many_starts(self):
        n2, n3, distinguishable = check_swap_symmetry(1, members=20, n_steps=20)
        assert n2.passed and n3.passed and distinguishable.passed
        assert "20 mirrored pairs" in n3.detail
        assert distinguishable.detail.startswith("not-applicable")

    def test_injection_statistics(self):
        chi2, spacing = check_injection_statistics(0)
        assert 0.0 <= chi2.value <= 1.0
        assert spacing.passed
        assert spacing.value == pytest.approx(5.0)


class TestPropertySuite:
    def test_collects_every_result(self, monkeypatch):
        fake = [
            ("single", lambda seed: gate_below("one", seed, 10)),
            ("pair", lambda seed: [GateResult("two", True, 0.0, 1.0), gate_below("three", 5, 1)]),
        ]
        monkeypatch.setattr(properties, "PROPERTIES", fake)
        progress = []
        results = property_suite(seed=3, on_progress=lambda label, n: progress.append((label, n)))
        assert [r.name for r in results] == ["one", "two", "three"]
        assert [r.passed for r in results] == [True, True, False]
        assert progress == [("single", 1), ("pair", 2)]
