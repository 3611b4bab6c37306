"""Binary wave-field snapshots.

Layout, little-endian: magic ``BXWF``, uint32 version, uint32 ndim, then per axis
float64 x_min, float64 x_max, uint64 n_points, then float64 time, then the amplitudes
as float64 pairs (re, im) in C order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from bohmex.grid import Grid1D, WaveField1D, WaveField2D

MAGIC = b"BXWF"
VERSION = 1
_HEAD = struct.Struct("<4sII")
_AXIS = struct.Struct("<ddQ")
_TIME = struct.Struct("<d")


class SnapshotExporter:
    """Export a 1D or 2D wave field as a binary grid dump."""

    suffix = ".bxwf"

    def export(self, data: WaveField1D | WaveField2D, output_path: str | Path) -> None:
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        grids = [data.grid] if isinstance(data, WaveField1D) else [data.grid_x1, data.grid_x2]
        with open(path, "wb") as f:
            f.write(_HEAD.pack(MAGIC, VERSION, len(grids)))
            for grid in grids:
                f.write(_AXIS.pack(grid.x_min, grid.x_max, grid.n_points))
            f.write(_TIME.pack(data.time))
            f.write(np.ascontiguousarray(data.amplitudes, dtype="<c16").tobytes())


def read_snapshot(path: str | Path) -> WaveField1D | WaveField2D:
    raw = Path(path).read_bytes()
    magic, version, ndim = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path} is not a wave-field snapshot")
    if version != VERSION or ndim not in (1, 2):
        raise ValueError(f"unsupported snapshot version {version} with {ndim} axes")
    offset = _HEAD.size
    grids = []
    for _ in range(ndim):
        x_min, x_max, n = _AXIS.unpack_from(raw, offset)
        grids.append(Grid1D(x_min, x_max, int(n)))
        offset += _AXIS.size
    (time,) = _TIME.unpack_from(raw, offset)
    offset += _TIME.size
    shape = tuple(g.n_points for g in grids)
    amplitudes = np.frombuffer(raw, dtype="<c16", offset=offset).reshape(shape).astype(complex)
    if ndim == 1:
        return WaveField1D(grids[0], amplitudes, time)
    return WaveField2D(grids[0], grids[1], amplitudes, time)
