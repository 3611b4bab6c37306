"""Tests for the device model and contact injection."""

import math

import numpy as np
import pytest

from bohmex.transport.device import Contact, DeviceConfig, Interaction, Spin, TransportSettings
from bohmex.transport.injection import (
    InjectionCell,
    SpinAlternator,
    attempt_period,
    build_cells,
    injection_attempts,
    injection_times,
)


class TestDeviceConfig:
    def test_defaults(self):
        device = DeviceConfig()
        assert device.units.mass_eff_ratio == pytest.approx(0.067)
        assert device.thermal_energy == pytest.approx(0.02585, rel=1e-3)

    def test_rejects_negative_bias(self):
        with pytest.raises(ValueError, match="bias"):
            DeviceConfig(bias=-0.1)

    def test_rejects_short_contacts(self):
        with pytest.raises(ValueError, match="200 nm"):
            DeviceConfig(contact_extension=150.0)

    def test_occupation_at_fermi_level(self):
        device = DeviceConfig()
        at_fermi = device.fermi_level - device.subband_offset
        assert device.occupation(at_fermi) == pytest.approx(0.5)
        assert device.occupation(at_fermi + 0.5) < 1e-6

    def test_k_max_bounds_occupation(self):
        device = DeviceConfig()
        energy = device.units.energy(device.k_max())
        assert device.occupation(energy) == pytest.approx(1e-6, rel=1e-6)

    def test_grid_covers_contacts(self):
        device = DeviceConfig(l_active=30.0, contact_extension=300.0)
        grid = device.grid(0.5)
        assert grid.x_min == -300.0
        assert grid.x_max == pytest.approx(330.0)
        assert grid.dx == pytest.approx(0.5)

    def test_injection_sites(self):
        device = DeviceConfig()
        assert device.injection_x0(Contact.SOURCE) < 0
        assert device.injection_x0(Contact.DRAIN) > device.l_active
        assert DeviceConfig.direction(Contact.DRAIN) == -1

    def test_potential_by_interaction(self):
        device = DeviceConfig(bias=0.1)
        assert not device.potential(Interaction.WI, 0.8).depends_on_context
        assert device.potential(Interaction.CEI, 0.8).depends_on_context
        assert device.potential(Interaction.EI, 0.8).external(np.array([30.0])) == pytest.approx(
            [-0.1]
        )

    def test_interaction_flags(self):
        assert Interaction.CEI.coulomb and Interaction.CEI.exchange
        assert not Interaction.WI.coulomb and not Interaction.WI.exchange
        assert Interaction.EI.exchange and not Interaction.EI.coulomb


class TestTransportSettings:
    def test_invalid(self):
        with pytest.raises(ValueError, match="positive"):
            TransportSettings(dx=0.0)
        with pytest.raises(ValueError, match="at least 1"):
            TransportSettings(workers=0)

    def test_propagator_uses_cap(self):
        cfg = TransportSettings().propagator(DeviceConfig())
        assert cfg.boundary == "cap"
        assert cfg.units.mass_eff_ratio == pytest.approx(0.067)


class TestInjectionCell:
    def test_attempt_clock(self):
        cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=1.0, phase=1.0)
        assert cell.k_center == pytest.approx(0.15)
        assert cell.next_attempt_time == 1.0
        cell.attempts = 3
        assert cell.next_attempt_time == 16.0

    def test_occupation_range(self):
        with pytest.raises(ValueError, match="occupation"):
            InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=1.5)

    def test_attempt_period(self):
        device = DeviceConfig()
        expected = math.pi / (device.units.velocity(0.3) * 0.01)
        assert attempt_period(0.3, 0.01, device) == pytest.approx(expected)


class TestInjectionAttempts:
    def test_certain_injection_every_period(self):
        device = DeviceConfig()
        cell = InjectionCell(Contact.DRAIN, 2, 0.1, 0.2, t0=5.0, fermi_occupation=1.0)
        rng = np.random.default_rng(0)
        injected = injection_attempts(cell, (0.0, 20.0), rng, device)
        assert [i.time for i in injected] == [0.0, 5.0, 10.0, 15.0]
        assert cell.attempts == 4
        first = injected[0]
        assert first.contact is Contact.DRAIN
        assert first.spec.k0 == pytest.approx(-0.15)
        assert first.spec.x0 == device.injection_x0(Contact.DRAIN)

    def test_empty_cell_never_injects(self):
        cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=0.0)
        rng = np.random.default_rng(0)
        assert injection_attempts(cell, (0.0, 100.0), rng, DeviceConfig()) == []
        assert cell.attempts == 20

    def test_windows_do_not_repeat_attempts(self):
        device = DeviceConfig()
        cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=1.0)
        rng = np.random.default_rng(1)
        first = injection_attempts(cell, (0.0, 7.0), rng, device)
        second = injection_attempts(cell, (7.0, 12.0), rng, device)
        assert [i.time for i in first] == [0.0, 5.0]
        assert [i.time for i in second] == [10.0]

    def test_spins_alternate_per_contact(self):
        device = DeviceConfig()
        spins = SpinAlternator()
        cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=5.0, fermi_occupation=1.0)
        injected = injection_attempts(cell, (0.0, 20.0), np.random.default_rng(2), device, spins)
        assert [i.spin for i in injected] == [Spin.UP, Spin.DOWN, Spin.UP, Spin.DOWN]
        assert spins.next_spin(Contact.DRAIN) is Spin.UP
        assert spins.pool_size == 2

    def test_acceptance_rate(self):
        cell = InjectionCell(Contact.SOURCE, 0, 0.1, 0.2, t0=1.0, fermi_occupation=0.3)
        times = injection_times(cell, 50_000.0, np.random.default_rng(3))
        assert times.size / 50_000 == pytest.approx(0.3, abs=0.01)
        assert np.diff(times).min() >= cell.t0 - 1e-9
        assert cell.attempts == 0


class TestBuildCells:
    def test_cells_cover_both_contacts(self):
        device = DeviceConfig()
        cells = build_cells(device, 8, np.random.default_rng(4))
        assert len(cells) == 16
        source = [c for c in cells if c.contact is Contact.SOURCE]
        assert source[-1].k_hi == pytest.approx(device.k_max())
        assert all(0.0 <= c.phase <= c.t0 for c in cells)
        occupations = [c.fermi_occupation for c in source]
        assert occupations == sorted(occupations, reverse=True)
