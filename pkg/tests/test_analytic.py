"""Tests for closed-form Gaussian integrals and kinetic-energy oracles."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from bohmex.analytic import (
    ensemble_kinetic_energy,
    gaussian_kinetic,
    gaussian_overlap,
    grid_kinetic_energy,
    orbital_matrix,
    spin_mixed_norm_check,
    symmetrized_amplitude,
)
from bohmex.errors import TooManyParticles
from bohmex.grid import Grid1D
from bohmex.packets import GaussianPacketSpec, Species, packet_triple
from bohmex.units import FREE_ELECTRON


class TestGaussianIntegrals:
    def test_self_overlap(self, packet):
        assert gaussian_overlap(packet, packet) == pytest.approx(1.0)

    def test_overlap_matches_quadrature(self):
        p = GaussianPacketSpec(-3.0, 0.4, 5.0)
        q = GaussianPacketSpec(4.0, -0.2, 5.0)
        x = np.linspace(-80.0, 80.0, 16001)
        numeric = trapezoid(np.conj(p.amplitude(x)) * q.amplitude(x), x)
        assert gaussian_overlap(p, q) == pytest.approx(numeric, abs=1e-10)

    def test_diagonal_kinetic(self, packet):
        expected = 0.5 * FREE_ELECTRON.hbar2_over_m * (packet.k0**2 + 0.5 / packet.sigma_x**2)
        assert gaussian_kinetic(packet, packet) == pytest.approx(expected)

    def test_off_diagonal_kinetic_matches_quadrature(self):
        p = GaussianPacketSpec(-1.0, 0.5, 3.0)
        q = GaussianPacketSpec(2.0, 0.1, 3.0)
        x = np.linspace(-60.0, 60.0, 24001)
        numeric = 0.5 * FREE_ELECTRON.hbar2_over_m * trapezoid(
            np.conj(p.derivative(x)) * q.derivative(x), x
        )
        assert gaussian_kinetic(p, q) == pytest.approx(numeric, abs=1e-9)


class TestEnsembleKineticEnergy:
    def test_distinguishable_is_sum(self, pair_packets):
        expected = sum(gaussian_kinetic(p, p).real for p in pair_packets)
        assert ensemble_kinetic_energy(pair_packets, Species.DISTINGUISHABLE) == pytest.approx(
            expected
        )

    @pytest.mark.parametrize("species", [Species.FERMION, Species.BOSON])
    def test_double_sum_agrees(self, species):
        triple = packet_triple(0.8, 0.0, 0.0, 1.0)
        single = ensemble_kinetic_energy(triple, species)
        double = ensemble_kinetic_energy(triple, species, double_sum=True)
        assert double == pytest.approx(single, rel=1e-10)

    def test_far_packets_lose_exchange(self):
        triple = packet_triple(6.0, 0.0, 0.0, 1.0)
        fermion = ensemble_kinetic_energy(triple, Species.FERMION)
        plain = ensemble_kinetic_energy(triple, Species.DISTINGUISHABLE)
        assert fermion == pytest.approx(plain, rel=1e-6)

    def test_pauli_raises_kinetic_energy(self):
        triple = packet_triple(0.5, 0.0, 0.0, 1.0)
        fermion = ensemble_kinetic_energy(triple, Species.FERMION)
        assert fermion > ensemble_kinetic_energy(triple, Species.DISTINGUISHABLE)
        assert fermion > ensemble_kinetic_energy(triple, Species.BOSON)

    def test_too_many_particles(self):
        packets = [GaussianPacketSpec(float(10 * i), 0.0, 1.0) for i in range(7)]
        with pytest.raises(TooManyParticles):
            ensemble_kinetic_energy(packets, Species.FERMION)

    def test_empty(self):
        assert ensemble_kinetic_energy([], Species.FERMION) == 0.0


class TestGridKineticEnergy:
    def test_matches_analytic(self):
        triple = packet_triple(1.0, 0.0, 0.0, 1.0)
        grid = Grid1D(-8.0, 8.0, 64)
        analytic = ensemble_kinetic_energy(triple, Species.FERMION)
        assert grid_kinetic_energy(triple, Species.FERMION, grid) == pytest.approx(
            analytic, rel=1e-2
        )


class TestSymmetrizedAmplitude:
    def test_orbital_matrix_shape(self, triple_packets):
        x = np.zeros((4, 3))
        assert orbital_matrix(triple_packets, x).shape == (4, 3, 3)

    def test_fermion_vanishes_on_coincidence(self, triple_packets):
        x = np.array([[-5.0, -5.0, 7.0], [1.0, 2.0, 1.0]])
        assert np.allclose(symmetrized_amplitude(triple_packets, Species.FERMION, x), 0.0)

    def test_boson_symmetric_under_exchange(self, triple_packets):
        x = np.array([-5.0, 2.0, 7.0])
        swapped = np.array([2.0, -5.0, 7.0])
        assert symmetrized_amplitude(triple_packets, Species.BOSON, x) == pytest.approx(
            symmetrized_amplitude(triple_packets, Species.BOSON, swapped)
        )


class TestSpinMixedNormCheck:
    def test_factorization_exact_for_distant_packets(self):
        triple = packet_triple(5.0, 0.0, 0.0, 1.0)
        exact, approx = spin_mixed_norm_check(triple, [0.0, -5.0, 5.0])
        assert approx <= exact
        assert (exact - approx) / exact < 1e-6

    def test_needs_three_particles(self, pair_packets):
        with pytest.raises(ValueError, match="three"):
            spin_mixed_norm_check(pair_packets, [0.0, 1.0])
