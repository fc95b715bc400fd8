"""Per-iteration optimization records and their CSV forms."""

from __future__ import annotations

import csv
import enum
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

SUCCESS_NORM = 0.99

TRAJECTORY_COLUMNS = ["iteration", "tau", "phase", "energy", "ar", "ar_error",
                      "optimal_norm", "active_count", "entropy"]


class Phase(str, enum.Enum):
    FLOW = "flow"
    JACOBI = "jacobi"
    DONE = "done"


@dataclass
class Record:
    iteration: int
    tau: float
    phase: Phase
    energy: float
    ar: float
    optimal_norm: float
    active_count: int
    entropy: float = math.nan
    ar_rounded: float = math.nan

    @property
    def ar_error(self) -> float:
        return 1.0 - self.ar


@dataclass
class Trajectory:
    optimizer: str
    n_qubits: int
    records: list[Record] = field(default_factory=list)
    thetas: list[np.ndarray] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, record: Record, theta: np.ndarray) -> None:
        self.records.append(record)
        self.thetas.append(np.array(theta, dtype=float))

    @property
    def final(self) -> Record:
        return self.records[-1]

    @property
    def success(self) -> bool:
        return self.final.optimal_norm > SUCCESS_NORM

    @property
    def flow_records(self) -> list[Record]:
        return [r for r in self.records if r.phase is Phase.FLOW]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def max_active_count(self) -> int:
        return max(r.active_count for r in self.records)


def _fmt(x) -> str:
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def atomic_write_rows(path: str | Path, header: list[str], rows) -> None:
    """Write a CSV through a temp file and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(traj: Trajectory, path: str | Path,
              extra: dict[str, list[float]] | None = None) -> None:
    """Trajectory CSV; ``extra`` columns (one value per record) are appended."""
    extra = extra or {}
    header = TRAJECTORY_COLUMNS + list(extra)
    rows = []
    for k, r in enumerate(traj.records):
        row = [r.iteration, r.tau, r.phase, r.energy, r.ar, r.ar_error,
               r.optimal_norm, r.active_count, r.entropy]
        rows.append(row + [extra[name][k] for name in extra])
    atomic_write_rows(path, header, rows)


def write_params_csv(traj: Trajectory, path: str | Path) -> None:
    n_params = len(traj.thetas[0]) if traj.thetas else 0
    header = ["iteration"] + [f"theta_{j}" for j in range(n_params)]
    rows = ([r.iteration, *theta] for r, theta in zip(traj.records, traj.thetas))
    atomic_write_rows(path, header, rows)


def read_csv(path: str | Path, params_path: str | Path | None = None,
             optimizer: str = "", n_qubits: int = 0) -> Trajectory:
    traj = Trajectory(optimizer, n_qubits)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or any(c not in rows[0] for c in TRAJECTORY_COLUMNS):
        raise ValueError(f"{path}: not a trajectory CSV")
    thetas: dict[int, np.ndarray] = {}
    if params_path is not None:
        with open(params_path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for line in reader:
                thetas[int(line[0])] = np.array([float(x) for x in line[1:]])
    for row in rows:
        rec = Record(int(row["iteration"]), float(row["tau"]), Phase(row["phase"]),
                     float(row["energy"]), float(row["ar"]), float(row["optimal_norm"]),
                     int(row["active_count"]), float(row["entropy"]),
                     float(row.get("ar_rounded") or math.nan))
        traj.records.append(rec)
        traj.thetas.append(thetas.get(rec.iteration, np.array([])))
    return traj
