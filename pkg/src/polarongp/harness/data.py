"""Solver-generated training tables and their CSV form."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..model import from_dimensionless
from ..solver import BasisSpec, ground_energy, ring_momenta

__all__ = ["DataTable", "DATASET_COLUMNS", "snap_k", "evaluate_points", "fmt", "config_hash",
           "write_csv", "read_csv"]

log = logging.getLogger(__name__)

DATASET_COLUMNS = ("omega", "lambda_ssh", "lambda_h", "k", "energy", "M", "N")
MAX_FAILURE_FRACTION = 0.05


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (int, float, np.integer, np.floating)) else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def config_hash(cfg) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def snap_k(k: float, ring_size: int, bounds: tuple | None = None) -> float:
    """Nearest ring momentum ``2 pi m / L`` in [0, pi], optionally restricted to ``bounds``."""
    grid = ring_momenta(ring_size)
    if bounds is not None:
        inside = grid[(grid >= bounds[0] - 1e-12) & (grid <= bounds[1] + 1e-12)]
        if len(inside):
            grid = inside
    return float(grid[int(np.argmin(np.abs(grid - k)))])


@dataclass
class DataTable:
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    omitted: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(DATASET_COLUMNS))

    def column(self, name: str) -> np.ndarray:
        return self.array()[:, DATASET_COLUMNS.index(name)]

    def inputs(self, names=("omega", "lambda_ssh", "k")) -> np.ndarray:
        a = self.array()
        return a[:, [DATASET_COLUMNS.index(n) for n in names]]

    @property
    def targets(self) -> np.ndarray:
        return self.column("energy")

    def sort(self) -> None:
        self.rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[5], r[6]))

    def to_csv(self, path) -> None:
        write_csv(path, DATASET_COLUMNS, self.rows)

    @classmethod
    def from_csv(cls, path) -> "DataTable":
        header, rows = read_csv(path)
        if tuple(header) != DATASET_COLUMNS:
            raise ValueError(f"unexpected dataset header {header}")
        parsed = [[float(v) for v in r[:5]] + [int(r[5]), int(r[6])] for r in rows]
        return cls(rows=parsed)


def _solve_point(args):
    omega, lam, lam_h, k, M, N, t, L = args
    p = from_dimensionless({"lambda_ssh": lam, "lambda_h": lam_h}, t=t, omega=omega, ring_size=L)
    try:
        return ground_energy(p, BasisSpec(M, N), k), None
    except Exception as err:  # recorded per row, aggregated by the caller
        return None, f"{type(err).__name__}: {err}"


def evaluate_points(points, spec: BasisSpec, lambda_h: float = 0.0, t: float = 1.0, ring_size: int = 32,
                    workers: int = 1, snap: bool = True,
                    columns=("omega", "lambda_ssh", "k"), fixed: dict | None = None,
                    k_bounds: tuple | None = None) -> DataTable:
    """Solver energies at design points; rows come back canonically sorted.

    ``columns`` names the design columns; missing ones come from ``fixed``.
    Snapped momenta stay inside ``k_bounds`` when given.
    """
    fixed = dict(fixed or {})
    jobs = []
    for pt in np.atleast_2d(points):
        vals = dict(fixed)
        vals.update(zip(columns, map(float, pt)))
        k = snap_k(vals["k"], ring_size, k_bounds) if snap else vals["k"]
        jobs.append((vals["omega"], vals["lambda_ssh"], vals.get("lambda_h", lambda_h), k,
                     spec.cloud_extent, spec.max_phonons, t, ring_size))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_solve_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_solve_point(j) for j in jobs]
    table = DataTable()
    seen = set()
    for job, (energy, err) in zip(jobs, results):
        key = job[:4] + job[4:6]
        if err is not None or energy is None or not math.isfinite(energy):
            table.omitted.append({"point": list(job[:4]), "reason": err or "non-finite energy"})
            continue
        if key in seen:
            continue
        seen.add(key)
        # stored at CSV precision so the file is exactly what downstream fits see
        table.rows.append([float(fmt(v)) for v in (job[0], job[1], job[2], job[3], energy)] + [job[4], job[5]])
    if len(table.omitted) > MAX_FAILURE_FRACTION * len(jobs):
        raise RuntimeError(f"{len(table.omitted)} of {len(jobs)} solver evaluations failed: {table.omitted[:3]}")
    for om in table.omitted:
        log.warning("omitted design point %s: %s", om["point"], om["reason"])
    table.sort()
    return table
