"""Integer-valued piecewise-constant controls on uniform 1D grids.

A control takes values in a finite ascending set of integer levels and is
constant on each cell of a uniform decomposition of (t0, tf).  Everything on
this level is exact integer arithmetic: total variation, L1 distances in
units of the cell width, refinement to finer grids, and the normalized step
representation (switch times plus heights with adjacent heights distinct).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LevelSet",
    "UniformGrid",
    "Control",
    "StepRepresentation",
    "total_variation",
    "l1_distance",
    "to_step_representation",
    "from_step_representation",
    "refine",
    "control_to_json",
    "control_from_json",
    "save_control",
    "load_control",
    "write_control_csv",
]


@dataclass(frozen=True)
class LevelSet:
    """Strictly ascending integer levels a control may take."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(int(v) for v in self.values)
        if any(int(v) != v for v in self.values):
            raise ValueError("levels must be integers")
        if len(vals) < 2:
            raise ValueError("need at least two levels")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("levels must be strictly ascending")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, level: int) -> bool:
        return level in self.values

    @property
    def span(self) -> int:
        return self.values[-1] - self.values[0]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


@dataclass(frozen=True)
class UniformGrid:
    """Uniform decomposition of (t0, tf) into n_cells half-open cells."""

    t0: float
    tf: float
    n_cells: int

    def __post_init__(self) -> None:
        if not self.tf > self.t0:
            raise ValueError("tf must exceed t0")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_cells

    def boundaries(self) -> np.ndarray:
        """All n_cells + 1 cell boundaries, endpoints included."""
        return self.t0 + (self.tf - self.t0) * np.arange(self.n_cells + 1) / self.n_cells


def _as_value_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValueError("values must be integers")
        arr = rounded
    arr = arr.astype(np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Control:
    """A grid plus one integer level value per cell.

    When a LevelSet is supplied, membership of every value is checked at
    construction; controls are immutable afterwards (the value array is
    read-only).
    """

    grid: UniformGrid
    values: np.ndarray
    levels: LevelSet | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        arr = _as_value_array(self.values)
        if arr.shape[0] != self.grid.n_cells:
            raise ValueError("need one value per grid cell")
        if self.levels is not None:
            member = np.isin(arr, self.levels.as_array())
            if not member.all():
                bad = arr[~member][0]
                raise ValueError(f"value {bad} not in level set {self.levels.values}")
        object.__setattr__(self, "values", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Control):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.grid, self.values.tobytes()))


@dataclass(frozen=True)
class StepRepresentation:
    """Normalized step function: interior switch times and run heights.

    heights has one more entry than switch_times and adjacent heights differ,
    so the representation of a given function is unique.
    """

    switch_times: tuple[float, ...]
    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.heights) != len(self.switch_times) + 1:
            raise ValueError("need exactly one more height than switch times")
        if any(b <= a for a, b in zip(self.switch_times, self.switch_times[1:])):
            raise ValueError("switch times must be strictly ascending")
        if any(a == b for a, b in zip(self.heights, self.heights[1:])):
            raise ValueError("adjacent heights must differ")

    def total_variation(self) -> int:
        return int(sum(abs(b - a) for a, b in zip(self.heights, self.heights[1:])))


def total_variation(c: Control) -> int:
    """Sum of absolute jumps over interior cell boundaries (no boundary terms)."""
    return int(np.abs(np.diff(c.values)).sum())


def l1_distance(a: Control, b: Control) -> float:
    """L1 distance h * sum |a_i - b_i|; both controls must share the grid."""
    if a.grid != b.grid:
        raise ValueError("controls live on different grids")
    return a.grid.h * float(np.abs(a.values - b.values).sum())


def to_step_representation(c: Control) -> StepRepresentation:
    """Merge consecutive equal cells into runs separated by switch times."""
    vals = c.values
    change = np.flatnonzero(np.diff(vals)) + 1  # first cell index of each new run
    bounds = c.grid.boundaries()
    times = tuple(float(bounds[i]) for i in change)
    heights = tuple(int(vals[i]) for i in np.concatenate(([0], change)))
    return StepRepresentation(times, heights)


def from_step_representation(rep: StepRepresentation, grid: UniformGrid,
                             levels: LevelSet | None = None) -> Control:
    """Reconstruct the control, assuming every switch lies on a cell boundary."""
    bounds = grid.boundaries()
    vals = np.empty(grid.n_cells, dtype=np.int64)
    run = 0
    for i in range(grid.n_cells):
        # advance past switches at or before this cell's left boundary
        while run < len(rep.switch_times) and rep.switch_times[run] <= bounds[i] + 1e-12 * max(1.0, abs(bounds[i])):
            run += 1
        vals[i] = rep.heights[run]
    return Control(grid, vals, levels)


def refine(c: Control, factor: int) -> Control:
    """Replicate each cell value `factor` times; same function on a finer grid."""
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    grid = UniformGrid(c.grid.t0, c.grid.tf, c.grid.n_cells * int(factor))
    return Control(grid, np.repeat(c.values, int(factor)), c.levels)


def control_to_json(c: Control) -> dict:
    return {
        "t0": c.grid.t0,
        "tf": c.grid.tf,
        "n_cells": c.grid.n_cells,
        "values": [int(v) for v in c.values],
    }


def control_from_json(data: dict, levels: LevelSet | None = None) -> Control:
    grid = UniformGrid(float(data["t0"]), float(data["tf"]), int(data["n_cells"]))
    return Control(grid, data["values"], levels)


def save_control(c: Control, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(control_to_json(c), fh, indent=2)
        fh.write("\n")


def load_control(path, levels: LevelSet | None = None) -> Control:
    with open(path, encoding="utf-8") as fh:
        return control_from_json(json.load(fh), levels)


def write_control_csv(c: Control, path) -> None:
    """One row per cell: cell_start, cell_end, value (plot-ready)."""
    bounds = c.grid.boundaries()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_start", "cell_end", "value"])
        for i, v in enumerate(c.values):
            writer.writerow([repr(float(bounds[i])), repr(float(bounds[i + 1])), int(v)])
