"""Callbacks invoked by the driver on every recorded frame."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import detect_spike, zero_crossings
from .core import FieldState, write_snapshot


@dataclass
class MaxTracker:
    """Running max/min of component 0."""

    times: list = field(default_factory=list)
    maxima: list = field(default_factory=list)
    minima: list = field(default_factory=list)
    max_gradient: list = field(default_factory=list)

    def __call__(self, state: FieldState):
        u = state.u
        self.times.append(state.time)
        self.maxima.append(float(u.max()))
        self.minima.append(float(u.min()))
        self.max_gradient.append(float(np.max(np.abs(np.roll(u, -1) - u)) / state.grid.dx))


@dataclass
class CrossingTracker:
    times: list = field(default_factory=list)
    crossings: list = field(default_factory=list)

    def __call__(self, state: FieldState):
        self.times.append(state.time)
        self.crossings.append(zero_crossings(state))

    def positions(self, direction: str) -> np.ndarray:
        """Per-frame position of the first crossing with ``direction`` (nan if absent)."""
        out = []
        for frame in self.crossings:
            hits = [c.position for c in frame if c.direction == direction]
            out.append(hits[0] if hits else np.nan)
        return np.array(out)


@dataclass
class SnapshotWriter:
    directory: str
    prefix: str = "snap"
    paths: list = field(default_factory=list)
    times: list = field(default_factory=list)

    def __call__(self, state: FieldState):
        os.makedirs(self.directory, exist_ok=True)
        path = os.path.join(self.directory, f"{self.prefix}_{len(self.paths):05d}.csv")
        write_snapshot(state, path)
        self.paths.append(path)
        self.times.append(state.time)


@dataclass
class SpikeMonitor:
    threshold: float = 1.0
    epsilon: Optional[float] = None
    reports: list = field(default_factory=list)

    def __call__(self, state: FieldState):
        self.reports.append((state.time, detect_spike(state, threshold=self.threshold, epsilon=self.epsilon)))

    @property
    def onset(self) -> Optional[float]:
        for t, rep in self.reports:
            if rep is not None:
                return t
        return None
