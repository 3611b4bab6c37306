"""Flight records, drain-plane current and dwell statistics."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from bohmex.transport.device import Contact, Spin

logger = logging.getLogger(__name__)


@dataclass
class FlightRecord:
    """Time an electron spent inside the active region, with its entry and exit sides."""

    trajectory_id: int
    t_in: float
    entry: Contact
    spin: Spin
    t_out: float | None = None
    exit: Contact | None = None

    @property
    def closed(self) -> bool:
        return self.t_out is not None

    @property
    def duration(self) -> float:
        if self.t_out is None:
            raise ValueError(f"flight {self.trajectory_id} is still open")
        return self.t_out - self.t_in

    def close(self, time: float, side: Contact) -> None:
        if time <= self.t_in:
            raise ValueError(f"exit time {time} does not follow entry time {self.t_in}")
        self.t_out = time
        self.exit = side

    def row(self) -> dict[str, object]:
        return {
            "trajectory_id": self.trajectory_id,
            "t_in_fs": self.t_in,
            "t_out_fs": self.t_out,
            "entry": str(self.entry),
            "exit": "" if self.exit is None else str(self.exit),
            "spin": str(self.spin),
        }


class CurrentRecord:
    """Net drain-plane crossings per time bin, in electrons per fs."""

    def __init__(self, t_total: float, bin_width: float = 1.0) -> None:
        if bin_width <= 0:
            raise ValueError("bin width must be positive")
        self.bin_width = bin_width
        self._counts = np.zeros(max(1, math.ceil(t_total / bin_width)), dtype=np.int64)
        self._t_start = 0.0

    def add_crossing(self, time: float, sign: int) -> None:
        idx = min(int(time // self.bin_width), self._counts.size - 1)
        self._counts[idx] += sign

    @property
    def times(self) -> np.ndarray:
        return self._t_start + (np.arange(self._counts.size) + 0.5) * self.bin_width

    @property
    def current(self) -> np.ndarray:
        return self._counts / self.bin_width

    @property
    def net_charge(self) -> int:
        return int(self._counts.sum())

    @property
    def duration(self) -> float:
        return self._counts.size * self.bin_width

    @property
    def mean_current(self) -> float:
        return float(self.current.mean())

    def trimmed(self, transient: float) -> CurrentRecord:
        """Copy without the bins that start before ``transient``."""
        skip = min(math.ceil(transient / self.bin_width), self._counts.size - 1)
        out = CurrentRecord(self.bin_width, self.bin_width)
        out._counts = self._counts[skip:].copy()
        out._t_start = self._t_start + skip * self.bin_width
        return out

    def rows(self) -> list[dict[str, float]]:
        return [
            {"time_fs": float(t), "current_e_per_fs": float(i)}
            for t, i in zip(self.times, self.current, strict=True)
        ]


@dataclass
class DwellStatistics:
    s_d: float = 0.0
    d_s: float = 0.0
    s_s: float = 0.0
    d_d: float = 0.0
    total: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "d_SD": self.s_d,
            "d_DS": self.d_s,
            "d_SS": self.s_s,
            "d_DD": self.d_d,
            "d_total_fs": self.total,
        }


def dwell_statistics(records: Iterable[FlightRecord]) -> DwellStatistics:
    """Dwell times summed per (entry, exit) pair and normalized by their total."""
    sums = {(a, b): 0.0 for a in Contact for b in Contact}
    open_count = 0
    for record in records:
        if not record.closed:
            open_count += 1
            continue
        sums[(record.entry, record.exit)] += record.duration
    if open_count:
        logger.warning("%d open flight records ignored in dwell statistics", open_count)
    total = sum(sums.values())
    if total == 0:
        logger.warning("no closed flight records; dwell statistics are zero")
        return DwellStatistics()
    S, D = Contact.SOURCE, Contact.DRAIN
    return DwellStatistics(
        s_d=sums[(S, D)] / total,
        d_s=sums[(D, S)] / total,
        s_s=sums[(S, S)] / total,
        d_d=sums[(D, D)] / total,
        total=total,
    )
