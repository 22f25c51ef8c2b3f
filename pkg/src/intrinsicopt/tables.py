"""Labelled numeric tables, the universal output of every sweep."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass
class ResultTable:
    """Rectangular table of finite reals with a provenance block.

    ``provenance`` entries are emitted as ``# key = value`` comment lines at
    the top of the CSV; numeric cells use the shortest round-trip
    representation so identical runs produce identical bytes.
    """

    name: str
    columns: tuple
    rows: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(str(c) for c in self.columns)
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = self.rows.reshape(0, len(self.columns))
        if self.rows.shape[1] != len(self.columns):
            raise DomainError(
                f"table {self.name!r}: {self.rows.shape[1]} columns of data "
                f"for {len(self.columns)} headers")
        if not np.all(np.isfinite(self.rows)):
            raise DomainError(f"table {self.name!r} contains non-finite values")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = [f"# {key} = {value}" for key, value in sorted(
            self.provenance.items(), key=lambda kv: str(kv[0]))]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.columns.index(name)]
        except ValueError:
            raise DomainError(f"table {self.name!r} has no column {name!r}") from None


def config_hash(text: str) -> str:
    """Stable short hash of a canonical configuration string."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
