"""Exporter protocol shared by the artifact writers."""

from __future__ import annotations

from pathlib import Path
from typing import Protocol, TypeVar

T_contra = TypeVar("T_contra", contravariant=True)


class Exporter(Protocol[T_contra]):
    """Writes one kind of run artifact; ``suffix`` is the file extension it produces."""

    suffix: str

    def export(self, data: T_contra, output_path: str | Path) -> None: ...


def check_suffix(exporter: Exporter, name: str) -> None:
    if not name.endswith(exporter.suffix):
        raise ValueError(f"artifact {name!r} does not end in {exporter.suffix}")
