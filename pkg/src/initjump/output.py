"""CSV/JSON writers.  Floats are written with ``repr`` so files round-trip exactly."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

CONVERGENCE_COLUMNS = ("epsilon", "t0", "sup_y", "sup_yt", "sup_yx", "defect", "w_at_t0", "ratio")
TRAJECTORY_COLUMNS = ("epsilon", "label", "t", "x", "z", "w")
FAN_COLUMNS = ("t", "label", "x")
DELTA0_COLUMNS = ("label", "delta0")
DELTA_COLUMNS = ("t", "label", "delta")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def trajectory_rows(solutions):
    for sol in solutions:
        for t, x, z, w in zip(sol.t, sol.x, sol.z, sol.w):
            yield (sol.epsilon, sol.label, t, x, z, w)


def fan_rows(fan):
    for j, label in enumerate(fan.labels):
        for t, x in zip(fan.t, fan.X[:, j]):
            yield (t, label, x)


def delta0_rows(jumps):
    return zip(jumps.labels, jumps.delta0)


def delta_rows(jumps):
    for i, t in enumerate(jumps.t):
        for j, label in enumerate(jumps.labels):
            yield (t, label, jumps.delta[i, j])


def report_rows(rows):
    for r in rows:
        d = r.as_row()
        yield tuple(d[c] for c in CONVERGENCE_COLUMNS)


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
