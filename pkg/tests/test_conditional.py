"""Tests for conditional-field sets and their assembly into conditional wave functions."""

import numpy as np
import pytest

from bohmex.analytic import symmetrized_amplitude
from bohmex.errors import DegenerateState, NullAssembly
from bohmex.exchange.conditional import (
    ConditionalStepper,
    PhaseRule,
    add_particle,
    assemble_conditional,
    channel_potentials,
    conditional_weights,
    evaluate_conditional,
    guidance,
    init_conditional_set,
    occupied_node_residual,
    remove_particle,
    sample_symmetrized,
    trajectory_matrix,
)
from bohmex.packets import GaussianPacketSpec, Species
from bohmex.exchange.evolve import evolve_system
from bohmex.tdse.potentials import Potential1D
from bohmex.tdse.propagator import PropagatorConfig
from bohmex.units import FREE_ELECTRON

STEP = PropagatorConfig(dt=0.5)


class TestInitConditionalSet:
    def test_shapes(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=8, seed=1)
        assert cset.fields.shape == (1, 2, 2, grid.n_points)
        assert cset.positions.shape == (8, 2)
        assert cset.shared
        assert cset.n_particles == 2
        assert cset.n_members == 8
        assert np.all(cset.seeds == 1)

    def test_every_channel_starts_from_its_packet(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=2, seed=1)
        for a in range(2):
            assert np.array_equal(cset.fields[0, 1, a], cset.fields[0, 1, 1 - a])
        assert cset.field(0, 1).norm() == pytest.approx(1.0)

    def test_per_member_fields(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.BOSON, grid, m=3, per_member=True)
        assert cset.fields.shape[0] == 3
        assert not cset.shared

    def test_given_positions(self, grid, pair_packets):
        start = np.array([[-35.0, 42.0]])
        cset = init_conditional_set(
            pair_packets, Species.FERMION, grid, initial_positions=start
        )
        assert np.array_equal(cset.positions, start)

    def test_pauli_forbidden_packets(self, grid, packet):
        with pytest.raises(DegenerateState, match="Pauli"):
            init_conditional_set([packet, packet], Species.FERMION, grid)

    def test_three_particle_sampling(self, grid, triple_packets):
        X = sample_symmetrized(triple_packets, Species.FERMION, grid, 50, seed=2)
        assert X.shape == (50, 3)
        assert np.all(grid.contains(X))


class TestAssembly:
    def test_weights_of_distinguishable_set(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.DISTINGUISHABLE, grid, m=4)
        assert np.array_equal(conditional_weights(cset), np.broadcast_to(np.eye(2), (4, 2, 2)))

    @pytest.mark.parametrize("species", [Species.FERMION, Species.BOSON])
    def test_initial_slice_of_symmetrized_state(self, grid, triple_packets, species):
        cset = init_conditional_set(triple_packets, species, grid, m=2, seed=3)
        r = cset.positions[1]
        xs = grid.x[::10]
        for a in range(3):
            config = np.tile(r, (xs.size, 1))
            config[:, a] = xs
            exact = symmetrized_amplitude(triple_packets, species, config)
            assembled = evaluate_conditional(cset, a, xs, member=1)
            j = int(np.argmax(np.abs(exact)))
            rescaled = assembled * exact[j] / assembled[j]
            assert np.abs(rescaled - exact).max() < 1e-10 * np.abs(exact).max()

    def test_occupied_node_rule_vanishes_at_other_particles(self, grid, triple_packets):
        cset = init_conditional_set(
            triple_packets,
            Species.FERMION,
            grid,
            m=2,
            seed=4,
            phase_rule=PhaseRule.OCCUPIED_NODE,
        )
        assert trajectory_matrix(cset).values.shape == (2, 3, 3, 3)
        for a in range(3):
            peak = np.abs(evaluate_conditional(cset, a, grid.x)).max()
            for k in range(3):
                if k != a:
                    value = evaluate_conditional(cset, a, cset.positions[0, k])
                    assert np.abs(value).max() < 1e-10 * peak

    def test_default_rule_is_occupied_node(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=2, seed=4)
        assert cset.phase_rule is PhaseRule.OCCUPIED_NODE

    def test_assembled_field_is_normalized(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=2, seed=5)
        psi = assemble_conditional(cset, 0, member=1)
        assert psi.norm() == pytest.approx(1.0)

    def test_null_assembly(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=2, seed=5)
        cset.fields = np.zeros_like(cset.fields)
        with pytest.raises(NullAssembly):
            guidance(cset, STEP)
        with pytest.raises(NullAssembly):
            assemble_conditional(cset, 1)


class TestGuidance:
    def test_single_packet_velocity(self, grid, packet):
        cset = init_conditional_set(
            [packet], Species.FERMION, grid, initial_positions=np.array([[1.3]])
        )
        guide = guidance(cset, STEP)
        assert guide.velocity.shape == (1, 1)
        assert guide.velocity[0, 0] == pytest.approx(FREE_ELECTRON.velocity(packet.k0), rel=1e-9)
        assert not guide.node.any()

    def test_stepper_advances_time_and_positions(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=4, seed=6)
        start, after = ConditionalStepper(Potential1D.free(), STEP).step(cset)
        assert after.time == pytest.approx(0.5)
        assert start.velocity.shape == (4, 2)
        assert not np.array_equal(after.positions, cset.positions)
        assert np.all(np.abs(start.velocity) <= grid.dx / STEP.dt)


class TestChannelPotentials:
    def test_context_free_potential_is_shared(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=4)
        assert channel_potentials(cset, Potential1D.free()).shape == (1, 2, grid.n_points)

    def test_pair_potential_needs_per_member_fields(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=4)
        with pytest.raises(ValueError, match="per-member"):
            channel_potentials(cset, Potential1D.harmonic_pair(1e-4))

    def test_channel_sees_the_other_particle(self, grid, pair_packets):
        cset = init_conditional_set(
            pair_packets, Species.FERMION, grid, initial_positions=np.array([[-30.0, 30.0]])
        )
        U = channel_potentials(cset, Potential1D.harmonic_pair(1.0))
        assert U.shape == (1, 2, grid.n_points)
        assert grid.x[np.argmin(U[0, 0])] == pytest.approx(30.0)
        assert grid.x[np.argmin(U[0, 1])] == pytest.approx(-30.0)

    def test_extra_context_adds_outside_particles(self, grid, pair_packets):
        cset = init_conditional_set(
            pair_packets, Species.FERMION, grid, initial_positions=np.array([[-30.0, 30.0]])
        )
        v = Potential1D.harmonic_pair(1.0)
        U = channel_potentials(cset, v, extra_context=np.array([[0.0]]))
        assert grid.x[np.argmin(U[0, 0])] == pytest.approx(15.0)


class TestAddRemoveParticle:
    def test_add_particle(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=3, seed=7)
        spec = GaussianPacketSpec(0.0, 0.2, 10.0)
        bigger = add_particle(cset, spec, 0.5)
        assert bigger.fields.shape == (1, 3, 3, grid.n_points)
        assert bigger.positions.shape == (3, 3)
        assert np.all(bigger.positions[:, 2] == 0.5)
        assert np.array_equal(bigger.fields[0, 0, 2], cset.fields[0, 0, 0])
        assert np.array_equal(bigger.fields[0, 2, 1], bigger.fields[0, 2, 0])
        assert bigger.packets[-1] == spec

    def test_remove_restores_original(self, grid, pair_packets):
        cset = init_conditional_set(pair_packets, Species.FERMION, grid, m=3, seed=7)
        bigger = add_particle(cset, GaussianPacketSpec(0.0, 0.2, 10.0), 0.5)
        back = remove_particle(bigger, 2)
        assert np.array_equal(back.fields, cset.fields)
        assert np.array_equal(back.positions, cset.positions)
        assert back.packets == cset.packets


def _evolved_residuals(grid, packets, potential, rule, n_steps=40):
    cset = init_conditional_set(
        packets, Species.FERMION, grid, m=2, seed=11, per_member=True, phase_rule=rule
    )
    residuals = []

    def record(state):
        residuals.append(occupied_node_residual(state))

    evolve_system(cset, potential, STEP, n_steps, on_record=record)
    return residuals


class TestOccupiedNodesOverTime:
    def test_single_particle_has_no_residual(self, grid, packet):
        cset = init_conditional_set([packet], Species.FERMION, grid, m=2, seed=1)
        assert occupied_node_residual(cset) == 0.0

    @pytest.mark.parametrize("rule", list(PhaseRule))
    def test_free_space_keeps_nodes_for_both_rules(self, grid, triple_packets, rule):
        residuals = _evolved_residuals(grid, triple_packets, Potential1D.free(), rule)
        assert len(residuals) == 41
        assert max(residuals) <= 1e-10

    def test_occupied_node_rule_keeps_nodes_with_pair_potential(self, grid, triple_packets):
        residuals = _evolved_residuals(
            grid, triple_packets, Potential1D.harmonic_pair(1e-4), PhaseRule.OCCUPIED_NODE
        )
        assert max(residuals) <= 1e-10

    def test_trajectory_rule_loses_nodes_with_pair_potential(self, grid, triple_packets):
        residuals = _evolved_residuals(
            grid, triple_packets, Potential1D.harmonic_pair(1e-4), PhaseRule.TRAJECTORY
        )
        assert residuals[0] <= 1e-10
        assert max(residuals) > 1e-6
