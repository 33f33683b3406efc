"""Delimited-text experiment reports.

A report file is a handful of `#`-prefixed header lines followed by a pure
numeric matrix, one row per record.  The header carries the report kind, the
full generating config as JSON, optional notes, and the column names, so the
file is self-describing and any run can be reproduced from its own header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MAGIC = "mobimanip-report v1"


@dataclass
class ReportFile:
    kind: str
    config: dict
    columns: list[str]
    rows: np.ndarray  # (n, len(columns)) float
    notes: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def select(self, **eq) -> np.ndarray:
        """Rows where each named column equals the given value."""
        keep = np.ones(len(self.rows), dtype=bool)
        for name, val in eq.items():
            keep &= np.isclose(self.column(name), val)
        return self.rows[keep]

    def format(self) -> str:
        lines = [
            f"# {MAGIC}",
            f"# kind: {self.kind}",
            f"# config: {json.dumps(self.config, sort_keys=True)}",
            f"# notes: {json.dumps(self.notes, sort_keys=True)}",
            "# columns: " + " ".join(self.columns),
        ]
        for row in np.atleast_2d(self.rows):
            lines.append(" ".join(format(x, ".17g") for x in row))
        return "\n".join(lines) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.format())


def mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def read_report(path: str) -> ReportFile:
    header: dict[str, str] = {}
    data: list[list[float]] = []
    with open(path) as f:
        first = f.readline().strip()
        if first != f"# {MAGIC}":
            raise ValueError(f"{path}: not a report file (got {first!r})")
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(":")
                header[key.strip()] = val.strip()
            else:
                data.append([float(x) for x in line.split()])
    columns = header["columns"].split()
    rows = np.array(data, dtype=float).reshape(len(data), len(columns))
    return ReportFile(
        kind=header["kind"],
        config=json.loads(header["config"]),
        columns=columns,
        rows=rows,
        notes=json.loads(header.get("notes", "{}")),
    )
