"""Per-iteration solver history and its on-disk formats.

Trace CSV (schema ``foops-trace/1``)
------------------------------------
The first line is ``# schema=foops-trace/1``.  The second is the header::

    iter, f0, F_1, ..., F_M, merit_value, merit_gap, p_value, gamma,
    grad_mapping_norm, inner_iters, inner_residual, x

``x`` holds the iterate as ``;``-separated coordinates.  Floats are written
with ``repr`` so files round-trip exactly and identical runs produce
byte-identical files.  Quantities a method does not compute (the merit
columns of linear scalarization) are written as ``nan``.

Summary JSON
------------
``SolveTrace.summary()`` returns a flat dict: final point, final objective
values, final row quantities, certified metrics when provided, status,
iteration count and wall time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "foops-trace/1"
STATUSES = ("converged", "max_iter", "inner_warning", "diverged")


@dataclass
class TraceRow:
    iter: int
    x: np.ndarray
    F: np.ndarray
    f0: float
    merit_value: float
    merit_gap: float
    p_value: float
    gamma: float
    grad_mapping_norm: float
    inner_iters: int
    inner_residual: float


@dataclass
class SolveTrace:
    method: str
    rows: list[TraceRow] = field(default_factory=list)
    status: str = "max_iter"
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    @property
    def x_final(self) -> np.ndarray:
        return self.rows[-1].x

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def header(self) -> list[str]:
        m = self.rows[0].F.size if self.rows else 0
        return (
            ["iter", "f0"]
            + [f"F_{i + 1}" for i in range(m)]
            + ["merit_value", "merit_gap", "p_value", "gamma", "grad_mapping_norm",
               "inner_iters", "inner_residual", "x"]
        )

    def write_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# schema={SCHEMA}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for r in self.rows:
                w.writerow(
                    [r.iter, _fmt(r.f0)]
                    + [_fmt(v) for v in r.F]
                    + [_fmt(r.merit_value), _fmt(r.merit_gap), _fmt(r.p_value), _fmt(r.gamma),
                       _fmt(r.grad_mapping_norm), r.inner_iters, _fmt(r.inner_residual),
                       ";".join(_fmt(v) for v in r.x)]
                )

    def summary(self) -> dict:
        r = self.final
        out = {
            "method": self.method,
            "status": self.status,
            "iterations": r.iter,
            "x": [float(v) for v in r.x],
            "F": [float(v) for v in r.F],
            "f0": float(r.f0),
            "merit_gap": float(r.merit_gap),
            "p_value": float(r.p_value),
            "grad_mapping_norm": float(r.grad_mapping_norm),
            "wall_time": self.wall_time,
        }
        out.update(self.extras)
        return out


def _fmt(v) -> str:
    return repr(float(v))


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Read a trace CSV back as ``(header, rows)`` with numeric fields parsed."""
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema={SCHEMA}":
            raise ValueError(f"{path}: unexpected schema line {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            rec = {}
            for k, v in zip(header, raw):
                if k == "x":
                    rec[k] = np.array([float(t) for t in v.split(";")])
                elif k in ("iter", "inner_iters"):
                    rec[k] = int(v)
                else:
                    rec[k] = float(v)
            rows.append(rec)
    return header, rows


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj
