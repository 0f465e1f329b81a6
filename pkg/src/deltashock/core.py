"""Periodic 1D grids, cell-centred field states and snapshot I/O."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np


class ValidationError(ValueError):
    """Bad user input: grid sizes, parameters, profiles."""


class NonFiniteError(FloatingPointError):
    """A NaN or inf showed up in the solution.

    ``last_good`` holds the most recent finite state, when one is known.
    """

    def __init__(self, message: str, last_good: "FieldState | None" = None):
        super().__init__(message)
        self.last_good = last_good


@dataclass(frozen=True)
class Grid1D:
    origin: float
    length: float
    cells: int
    periodic: bool = True

    def __post_init__(self):
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValidationError(f"grid length must be positive, got {self.length}")
        if int(self.cells) != self.cells or self.cells < 4:
            raise ValidationError(f"grid needs at least 4 cells, got {self.cells}")

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.cells) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.origin + np.arange(self.cells + 1) * self.dx

    def wrap(self, x):
        """Map positions into ``[origin, origin + length)``."""
        return self.origin + np.mod(np.asarray(x, dtype=float) - self.origin, self.length)

    def to_dict(self) -> dict:
        return {"origin": self.origin, "length": self.length,
                "cells": self.cells, "periodic": self.periodic}


def make_grid(L: float, n: int, periodic: bool = True, origin: float = 0.0) -> Grid1D:
    return Grid1D(origin=float(origin), length=float(L), cells=int(n), periodic=periodic)


@dataclass(frozen=True)
class FieldState:
    """Cell values of an ``m``-component field on ``grid`` at ``time``.

    ``values`` always has shape ``(m, n)``; scalar laws use ``m = 1``.
    """

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.grid.cells:
            raise ValidationError(
                f"values shape {np.shape(self.values)} does not match grid of {self.grid.cells} cells")
        object.__setattr__(self, "values", v)
        if self._checked and not np.all(np.isfinite(v)):
            raise NonFiniteError(f"non-finite values in state at t={self.time}")

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def u(self) -> np.ndarray:
        """First component (the scalar field for m = 1)."""
        return self.values[0]

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    def evolve(self, values: np.ndarray, time: float) -> "FieldState":
        return replace(self, values=values, time=float(time))


def sample(profile: Callable, grid: Grid1D, t: float = 0.0) -> FieldState:
    """Evaluate ``profile`` at the cell centres.

    ``profile`` is vectorised over x and returns either shape ``(n,)`` (scalar),
    ``(m, n)``, or something broadcastable to ``(n,)`` such as a constant.
    """
    x = grid.centers
    vals = np.asarray(profile(x), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.cells, float(vals))
    if vals.ndim == 1:
        vals = np.broadcast_to(vals, (grid.cells,))[None, :]
    vals = np.array(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("profile produced non-finite samples")
    return FieldState(grid, vals, float(t))


def total_mass(state: FieldState) -> np.ndarray:
    """Per-component ``dx * sum(values)``."""
    return state.grid.dx * state.values.sum(axis=1)


# -- snapshots ---------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_snapshot(state: FieldState, path, extra: dict | None = None) -> Path:
    """Write ``x,u0[,u1]`` CSV plus a JSON sidecar with grid and time."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["x"] + [f"u{j}" for j in range(state.components)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, xi in enumerate(state.x):
            w.writerow([_fmt(xi)] + [_fmt(state.values[j, i]) for j in range(state.components)])
    meta = {"grid": state.grid.to_dict(), "time": state.time, "components": state.components}
    if extra:
        meta.update(extra)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
    return path


def read_snapshot(path) -> FieldState:
    """Load a snapshot CSV; uses the sidecar JSON when present, else infers a grid."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "x":
        raise ValidationError(f"{path}: expected header starting with 'x'")
    data = np.array(rows[1:], dtype=float)
    x, vals = data[:, 0], data[:, 1:].T
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        g = meta["grid"]
        grid = Grid1D(float(g["origin"]), float(g["length"]), int(g["cells"]), bool(g.get("periodic", True)))
        t = float(meta.get("time", 0.0))
    else:
        dx = x[1] - x[0]
        grid = Grid1D(float(x[0] - dx / 2), float(dx * len(x)), len(x))
        t = 0.0
    return FieldState(grid, vals, t)
