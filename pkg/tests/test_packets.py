"""Tests for units, Gaussian packets and symmetrized two-particle states."""

import math

import numpy as np
import pytest

from bohmex.errors import DegenerateState, GridTooNarrow, MixedWidths
from bohmex.grid import Grid1D
from bohmex.packets import (
    GaussianPacketSpec,
    Species,
    build_manybody_2d,
    build_packet,
    packet_triple,
    phase_space_distance,
)
from bohmex.units import FREE_ELECTRON, GAAS_ELECTRON, UnitSystem


class TestUnitSystem:
    def test_free_electron_constants(self):
        assert FREE_ELECTRON.hbar2_over_m == pytest.approx(0.0761997, rel=1e-5)
        assert FREE_ELECTRON.hbar_over_m == pytest.approx(0.0761997 / 0.6582119569, rel=1e-5)

    def test_effective_mass_scales_kinetic_prefactor(self):
        assert GAAS_ELECTRON.hbar2_over_m == pytest.approx(
            FREE_ELECTRON.hbar2_over_m / 0.067, rel=1e-12
        )

    def test_energy_and_wave_vector_are_inverse(self):
        k = FREE_ELECTRON.wave_vector(0.12)
        assert FREE_ELECTRON.energy(k) == pytest.approx(0.12)

    def test_velocity_is_linear_in_k(self):
        assert FREE_ELECTRON.velocity(2.0) == pytest.approx(2.0 * FREE_ELECTRON.hbar_over_m)

    def test_negative_energy(self):
        with pytest.raises(ValueError, match="non-negative"):
            FREE_ELECTRON.wave_vector(-0.1)

    def test_non_positive_mass(self):
        with pytest.raises(ValueError, match="positive"):
            UnitSystem(mass_eff_ratio=0.0)


class TestSpecies:
    def test_identical(self):
        assert Species.FERMION.identical
        assert Species.BOSON.identical
        assert not Species.DISTINGUISHABLE.identical

    def test_permutation_sign(self):
        assert Species.FERMION.permutation_sign(-1) == -1
        assert Species.BOSON.permutation_sign(-1) == 1
        assert Species.FERMION.permutation_sign(1) == 1


class TestGaussianPacketSpec:
    def test_from_energy_direction(self):
        spec = GaussianPacketSpec.from_energy(50.0, 0.12, 25.0, direction=-1)
        assert spec.k0 < 0
        assert spec.e0 == pytest.approx(0.12)
        assert spec.sigma_k == pytest.approx(1.0 / 25.0)

    def test_rejects_non_positive_width(self):
        with pytest.raises(ValueError, match="sigma_x"):
            GaussianPacketSpec(0.0, 0.0, 0.0)

    def test_amplitude_peak(self):
        spec = GaussianPacketSpec(3.0, 0.0, 2.0)
        assert abs(spec.amplitude(3.0)) == pytest.approx((math.pi * 4.0) ** -0.25)

    def test_derivative_matches_finite_difference(self, packet):
        h = 1e-5
        x = np.array([-7.0, 1.5, 12.0])
        numeric = (packet.amplitude(x + h) - packet.amplitude(x - h)) / (2 * h)
        assert np.allclose(packet.derivative(x), numeric, atol=1e-8)

    def test_fits_requires_six_sigma(self):
        spec = GaussianPacketSpec(0.0, 0.0, 10.0)
        assert spec.fits(Grid1D(-60.0, 60.0, 121))
        assert not spec.fits(Grid1D(-59.0, 59.0, 119))


class TestBuildPacket:
    def test_samples_on_grid(self, grid, packet):
        psi = build_packet(packet, grid)
        assert psi.amplitudes.shape == (grid.n_points,)
        assert psi.grid is grid

    def test_too_narrow_grid(self, packet):
        with pytest.raises(GridTooNarrow, match="needs"):
            build_packet(packet, Grid1D(-20.0, 20.0, 101))


class TestManyBody2D:
    grid = Grid1D(-120.0, 120.0, 241)

    def test_fermion_antisymmetric(self, pair_packets):
        state = build_manybody_2d(*pair_packets, Species.FERMION, self.grid)
        assert np.allclose(state.amplitudes, -state.amplitudes.T)
        assert state.norm() == pytest.approx(1.0)
        assert state.species is Species.FERMION

    def test_boson_symmetric(self, pair_packets):
        state = build_manybody_2d(*pair_packets, Species.BOSON, self.grid)
        assert np.allclose(state.amplitudes, state.amplitudes.T)

    def test_distinguishable_is_product(self, pair_packets):
        state = build_manybody_2d(*pair_packets, Species.DISTINGUISHABLE, self.grid)
        marginal = state.marginal_x1()
        peak_x = self.grid.x[np.argmax(marginal)]
        assert peak_x == pytest.approx(pair_packets[0].x0, abs=self.grid.dx)

    def test_pauli_forbidden(self, packet):
        with pytest.raises(DegenerateState, match="norm"):
            build_manybody_2d(packet, packet, Species.FERMION, self.grid)


class TestPhaseSpaceDistance:
    def test_position_offset(self):
        p1 = GaussianPacketSpec(0.0, 0.0, 2.0)
        p2 = GaussianPacketSpec(2.0, 0.0, 2.0)
        assert phase_space_distance(p1, p2) == pytest.approx(math.sqrt(0.5))

    def test_mixed_widths(self):
        with pytest.raises(MixedWidths):
            phase_space_distance(GaussianPacketSpec(0, 0, 1.0), GaussianPacketSpec(0, 0, 2.0))

    @pytest.mark.parametrize("d", [0.25, 1.0, 3.5])
    def test_triple_is_equidistant(self, d):
        first, second, third = packet_triple(d, 1.0, 0.2, 3.0)
        assert phase_space_distance(first, second) == pytest.approx(d)
        assert phase_space_distance(first, third) == pytest.approx(d)
        assert second.k0 == third.k0
