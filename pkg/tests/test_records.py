"""Tests for flight records, the drain current record and dwell statistics."""

import numpy as np
import pytest

from bohmex.transport.device import Contact, Spin
from bohmex.transport.records import CurrentRecord, FlightRecord, dwell_statistics

S, D = Contact.SOURCE, Contact.DRAIN


def _flight(t_in, t_out, entry, exit_side, trajectory_id=0):
    record = FlightRecord(trajectory_id, t_in, entry, Spin.UP)
    record.close(t_out, exit_side)
    return record


class TestFlightRecord:
    def test_close(self):
        record = _flight(2.0, 7.5, S, D)
        assert record.closed
        assert record.duration == pytest.approx(5.5)
        assert record.row()["exit"] == "D"

    def test_open_record_has_no_duration(self):
        record = FlightRecord(3, 1.0, S, Spin.DOWN)
        assert not record.closed
        assert record.row()["exit"] == ""
        with pytest.raises(ValueError, match="still open"):
            _ = record.duration

    def test_exit_must_follow_entry(self):
        record = FlightRecord(0, 4.0, D, Spin.UP)
        with pytest.raises(ValueError, match="does not follow"):
            record.close(4.0, S)


class TestCurrentRecord:
    def test_crossings_binned(self):
        current = CurrentRecord(10.0, 1.0)
        current.add_crossing(2.3, +1)
        current.add_crossing(2.7, +1)
        current.add_crossing(5.1, -1)
        assert current.current.size == 10
        assert current.current[2] == 2.0
        assert current.current[5] == -1.0
        assert current.net_charge == 1
        assert current.mean_current == pytest.approx(0.1)
        assert current.times[0] == pytest.approx(0.5)

    def test_late_crossing_lands_in_last_bin(self):
        current = CurrentRecord(4.0, 2.0)
        current.add_crossing(4.0, +1)
        assert list(current.current) == [0.0, 0.5]
        assert current.duration == 4.0

    def test_trimmed(self):
        current = CurrentRecord(10.0, 1.0)
        current.add_crossing(0.5, +1)
        current.add_crossing(6.5, +1)
        tail = current.trimmed(3.0)
        assert tail.current.size == 7
        assert tail.times[0] == pytest.approx(3.5)
        assert tail.net_charge == 1
        assert current.net_charge == 2

    def test_rows(self):
        current = CurrentRecord(3.0, 1.0)
        current.add_crossing(1.2, +1)
        rows = current.rows()
        assert len(rows) == 3
        assert rows[1] == {"time_fs": 1.5, "current_e_per_fs": 1.0}

    def test_invalid_bin(self):
        with pytest.raises(ValueError, match="bin width"):
            CurrentRecord(10.0, 0.0)


class TestDwellStatistics:
    def test_fractions(self):
        records = [
            _flight(0.0, 6.0, S, D),
            _flight(0.0, 2.0, D, S),
            _flight(1.0, 2.0, S, S),
            _flight(1.0, 2.0, D, D),
        ]
        stats = dwell_statistics(records)
        assert stats.total == pytest.approx(10.0)
        assert stats.s_d == pytest.approx(0.6)
        assert stats.d_s == pytest.approx(0.2)
        values = stats.as_dict()
        assert values["d_SS"] == pytest.approx(0.1)
        assert values["d_DD"] == pytest.approx(0.1)
        assert sum(values[k] for k in ("d_SD", "d_DS", "d_SS", "d_DD")) == pytest.approx(1.0)

    def test_open_records_ignored(self):
        records = [_flight(0.0, 4.0, S, D), FlightRecord(1, 2.0, S, Spin.UP)]
        assert dwell_statistics(records).s_d == pytest.approx(1.0)

    def test_empty(self):
        stats = dwell_statistics([])
        assert stats.total == 0.0
        assert np.isclose(stats.s_d, 0.0)
