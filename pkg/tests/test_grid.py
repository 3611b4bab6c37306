"""Tests for grids and sampled wave fields."""

import numpy as np
import pytest

from bohmex.grid import Grid1D, WaveField1D, WaveField2D
from bohmex.packets import Species, build_manybody_2d, build_packet


class TestGrid1D:
    def test_spacing_and_nodes(self):
        grid = Grid1D(0.0, 15.0, 16)
        assert grid.dx == 1.0
        assert grid.x[0] == 0.0
        assert grid.x[-1] == 15.0
        assert grid.length == 15.0

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError, match="must exceed"):
            Grid1D(1.0, 0.0, 32)

    def test_rejects_too_few_points(self):
        with pytest.raises(ValueError, match="n_points"):
            Grid1D(0.0, 1.0, 4)

    def test_locate_clamps_outside_points(self):
        grid = Grid1D(0.0, 15.0, 16)
        idx, frac = grid.locate(np.array([-5.0, 3.25, 20.0]))
        assert list(idx) == [0, 3, 14]
        assert frac == pytest.approx([0.0, 0.25, 1.0])

    def test_interpolation_is_exact_for_linear_data(self):
        grid = Grid1D(0.0, 15.0, 16)
        values = 2.0 * grid.x + 1.0
        assert grid.interpolate(values, np.array([3.25, 7.5])) == pytest.approx([7.5, 16.0])

    def test_interpolation_of_stacked_rows(self):
        grid = Grid1D(0.0, 15.0, 16)
        rows = np.stack([grid.x, -grid.x])
        out = grid.interpolate(rows, np.array([2.5, 4.0]))
        assert out == pytest.approx([2.5, -4.0])

    def test_contains_and_clamp(self):
        grid = Grid1D(-1.0, 1.0, 21)
        assert grid.contains(0.5)
        assert not grid.contains(1.5)
        assert grid.clamp(np.array([-3.0, 0.2, 3.0])) == pytest.approx([-1.0, 0.2, 1.0])

    def test_refined_halves_spacing(self):
        grid = Grid1D(0.0, 15.0, 16)
        fine = grid.refined(2)
        assert fine.n_points == 31
        assert fine.dx == pytest.approx(0.5)
        assert fine.x_min == grid.x_min and fine.x_max == grid.x_max


class TestWaveField1D:
    def test_shape_mismatch(self, grid):
        with pytest.raises(ValueError, match="does not match"):
            WaveField1D(grid, np.zeros(10))

    def test_packet_is_normalized(self, grid, packet):
        psi = build_packet(packet, grid)
        assert psi.norm() == pytest.approx(1.0, abs=1e-9)
        assert psi.is_finite()

    def test_normalized_rescales(self, grid, packet):
        psi = build_packet(packet, grid)
        doubled = WaveField1D(grid, 2.0 * psi.amplitudes)
        assert doubled.norm() == pytest.approx(4.0, rel=1e-9)
        assert doubled.normalized().norm() == pytest.approx(1.0)

    def test_at_interpolates(self, grid, packet):
        psi = build_packet(packet, grid)
        assert psi.at(grid.x[600]) == pytest.approx(psi.amplitudes[600])

    def test_non_finite_detected(self, grid):
        amplitudes = np.zeros(grid.n_points, dtype=complex)
        amplitudes[3] = np.nan
        assert not WaveField1D(grid, amplitudes).is_finite()


class TestWaveField2D:
    def test_marginals_integrate_to_one(self, pair_packets):
        grid = Grid1D(-120.0, 120.0, 241)
        state = build_manybody_2d(*pair_packets, Species.FERMION, grid)
        assert state.norm() == pytest.approx(1.0)
        assert np.sum(state.marginal_x1()) * grid.dx == pytest.approx(1.0, abs=1e-6)
        assert np.sum(state.marginal_x2()) * grid.dx == pytest.approx(1.0, abs=1e-6)
        assert state.same_grids

    def test_shape_mismatch(self):
        g1 = Grid1D(0.0, 1.0, 16)
        g2 = Grid1D(0.0, 1.0, 20)
        with pytest.raises(ValueError, match="shape"):
            WaveField2D(g1, g2, np.zeros((16, 16)))
