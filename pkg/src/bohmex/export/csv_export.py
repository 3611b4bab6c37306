"""CSV table exporter."""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence
from pathlib import Path

FLOAT_FORMAT = "{:.10g}"


def _format(value: object) -> object:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else FLOAT_FORMAT.format(value)
    return value


class CsvExporter:
    """Export rows as CSV with a header naming every column and its unit.

    ``columns`` fixes the header and its order, so a table with no rows still gets one.
    Without it the header comes from the keys of the first row.
    """

    suffix = ".csv"

    def __init__(self, columns: Sequence[str] = ()) -> None:
        self.columns = tuple(columns)

    def export(self, data: Sequence[Mapping[str, object]], output_path: str | Path) -> None:
        fieldnames = list(self.columns) or (list(data[0].keys()) if data else [])
        if not fieldnames:
            raise ValueError(f"no rows and no declared columns for {output_path}")
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            writer.writerows({k: _format(v) for k, v in row.items()} for row in data)
