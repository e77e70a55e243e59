"""Workspace and singularity analysis: conditioning, wrench closure, and
worst-case force/torque capability over a position grid, plus the
attachment-circle diameter sweep.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateString
from .rig import GripPose, build_structure_matrix
from .tension import pretension, wrench_capability

COND_SINGULAR = float("inf")
_SV_RANK_TOL = 1e-9


@dataclass
class GridSpec:
    """Axis-aligned evaluation grid; cells are evaluated at their centers."""

    bounds: tuple            # ((x0, x1), (y0, y1), (z0, z1))
    resolution: tuple        # (nx, ny, nz), each >= 1

    def __post_init__(self):
        self.bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        self.resolution = tuple(int(n) for n in self.resolution)
        if len(self.bounds) != 3 or len(self.resolution) != 3:
            raise ValueError("grid needs 3 axis bounds and 3 resolutions")
        if any(n < 1 for n in self.resolution):
            raise ValueError("resolution must be >= 1 per axis")
        if any(b < a for a, b in self.bounds):
            raise ValueError("bounds must be ordered (lo, hi)")

    def cell_centers(self):
        """Cell-center coordinates in x-fastest order, (ncells, 3)."""
        axes = []
        for (a, b), n in zip(self.bounds, self.resolution):
            step = (b - a) / n
            axes.append(a + step * (np.arange(n) + 0.5))
        zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])


@dataclass
class WorkspaceReport:
    grid: GridSpec
    closure: np.ndarray          # bool per cell
    condition: np.ndarray        # sigma_max / sigma_min, inf when rank < 6
    force_capability: np.ndarray     # N, worst case over +-x, +-y, +-z
    torque_capability: np.ndarray    # N*m, worst case over the torque axes
    feasible_fraction: float = field(init=False)

    def __post_init__(self):
        self.closure = np.asarray(self.closure, dtype=bool)
        self.feasible_fraction = float(np.mean(self.closure)) if self.closure.size else 0.0

    def to_csv(self, path):
        centers = self.grid.cell_centers()
        with open(path, "w") as fh:
            fh.write("x_m,y_m,z_m,wrench_closure,condition_number,"
                     "force_capability_N,torque_capability_Nm\n")
            for i, (x, y, z) in enumerate(centers):
                fh.write(f"{float(x)!r},{float(y)!r},{float(z)!r},"
                         f"{int(self.closure[i])},{float(self.condition[i])!r},"
                         f"{float(self.force_capability[i])!r},"
                         f"{float(self.torque_capability[i])!r}\n")

    def summary(self):
        return {
            "bounds": [list(b) for b in self.grid.bounds],
            "resolution": list(self.grid.resolution),
            "cells": int(self.closure.size),
            "feasible_fraction": self.feasible_fraction,
            "min_force_capability": float(self.force_capability.min()),
            "min_torque_capability": float(self.torque_capability.min()),
            "max_condition": (None if not np.isfinite(self.condition).any()
                              else float(self.condition[np.isfinite(self.condition)].max())),
        }

    def save_summary(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load_csv(path, grid):
        rows = np.genfromtxt(path, delimiter=",", skip_header=1)
        rows = np.atleast_2d(rows)
        return WorkspaceReport(
            grid=grid,
            closure=rows[:, 3] != 0,
            condition=rows[:, 4],
            force_capability=rows[:, 5],
            torque_capability=rows[:, 6],
        )


def _axis_capability(S, bounds, rows):
    """Worst-case capability over the 6 signed unit directions of a row block."""
    worst = np.inf
    for axis in rows:
        for sign in (+1.0, -1.0):
            d = np.zeros(6)
            d[axis] = sign
            worst = min(worst, wrench_capability(S, bounds, d))
    return worst


def _condition_number(A):
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= _SV_RANK_TOL * max(1.0, sv[0]):
        return COND_SINGULAR
    return float(sv[0] / sv[-1])


def analyze_workspace(rig, grid, orientation=None):
    """Evaluate closure, conditioning, and capabilities at every grid cell.

    Cells where the structure matrix is degenerate (grip at a motor) are
    recorded with zero capability and closure False.
    """
    if orientation is None:
        orientation = np.array([1.0, 0.0, 0.0, 0.0])
    centers = grid.cell_centers()
    n = len(centers)
    closure = np.zeros(n, dtype=bool)
    condition = np.full(n, COND_SINGULAR)
    force_cap = np.zeros(n)
    torque_cap = np.zeros(n)
    bounds = rig.tension_bounds
    for i, c in enumerate(centers):
        try:
            S = build_structure_matrix(rig, GripPose(c, orientation))
        except DegenerateString:
            continue
        condition[i] = _condition_number(S.A)
        closure[i] = pretension(S, bounds).feasible
        force_cap[i] = _axis_capability(S, bounds, rows=(0, 1, 2))
        torque_cap[i] = _axis_capability(S, bounds, rows=(3, 4, 5))
    return WorkspaceReport(
        grid=grid,
        closure=closure,
        condition=condition,
        force_capability=force_cap,
        torque_capability=torque_cap,
    )


def diameter_sweep(rig_template, diameters):
    """Conditioning and torque capability at the rig center per circle diameter.

    Returns a list of dicts with keys diameter_m, condition_number,
    torque_capability_Nm; diameters must be sorted ascending.
    """
    diameters = [float(d) for d in diameters]
    if any(d < 0 for d in diameters):
        raise ValueError("diameters must be >= 0")
    if diameters != sorted(diameters):
        raise ValueError("diameters must be sorted ascending")
    center = 0.5 * (rig_template.motor_positions.min(axis=0)
                    + rig_template.motor_positions.max(axis=0))
    pose = GripPose(center)
    rows = []
    for d in diameters:
        rig = rig_template.with_diameter(d)
        S = build_structure_matrix(rig, pose)
        rows.append({
            "diameter_m": d,
            "condition_number": _condition_number(S.A),
            "torque_capability_Nm": _axis_capability(S, rig.tension_bounds,
                                                     rows=(3, 4, 5)),
        })
    return rows


def sweep_to_csv(rows, path_or_file):
    def write(fh):
        fh.write("diameter_m,condition_number,torque_capability_Nm\n")
        for r in rows:
            fh.write(f"{float(r['diameter_m'])!r},{float(r['condition_number'])!r},"
                     f"{float(r['torque_capability_Nm'])!r}\n")
    if hasattr(path_or_file, "write"):
        write(path_or_file)
    else:
        with open(path_or_file, "w") as fh:
            write(fh)
