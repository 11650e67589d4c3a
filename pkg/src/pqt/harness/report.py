"""Deterministic experiment reports.

A report serializes to canonical JSON: keys sorted lexicographically,
floats written with 12 significant digits, complex numbers as
``[re, im]`` pairs.  Identical (config, seed) pairs therefore produce
byte-identical serializations, which golden-file tests rely on.

Wall-clock time is kept on the report object but stays outside the
canonical serialization (it would break byte-identity); the CLI prints
it to stderr instead.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np


def _canonical(value):
    """Round floats to 12 significant digits and normalize containers."""
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (complex, np.complexfloating)):
        return [_canonical(value.real), _canonical(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_canonical(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


@dataclass
class Table:
    """A rectangular outcome table with named columns."""

    columns: list[str]
    rows: list[list]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not match columns {self.columns}")


@dataclass
class Report:
    """The emitted result of one experiment run."""

    config: dict
    seed: int
    metrics: list[dict] = field(default_factory=list)
    tables: dict[str, Table] = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    wall_clock_seconds: float = 0.0

    def add_metric(self, name: str, value: float, uncertainty: float | None = None) -> None:
        self.metrics.append({"name": name, "value": value, "uncertainty": uncertainty})

    def add_table(self, name: str, columns: list[str], rows: list[list]) -> None:
        self.tables[name] = Table(columns, rows)

    def payload(self) -> dict:
        return _canonical(
            {
                "config": self.config,
                "seed": self.seed,
                "metrics": self.metrics,
                "tables": {
                    name: {"columns": table.columns, "rows": table.rows}
                    for name, table in self.tables.items()
                },
                "verdicts": self.verdicts,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        """Flatten the outcome tables (and only them) into long-format CSV.

        Columns: table, row, column, value.  Scalar metrics stay in the
        JSON report; mixing them into the CSV would destabilize golden
        files.
        """
        import csv

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["table", "row", "column", "value"])
        payload = self.payload()["tables"]
        for name in sorted(payload):
            columns = payload[name]["columns"]
            for i, row in enumerate(payload[name]["rows"]):
                for column, value in zip(columns, row):
                    writer.writerow([name, i, column, value])
        return buffer.getvalue()
