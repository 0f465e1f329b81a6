"""Running configs, writing snapshots and manifests, and the refinement study."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import asymptotic_profile, detect_spike, zero_crossings
from .config import ConvergenceSpec, RunConfig, dumps, preset
from .core import FieldState, read_snapshot, total_mass
from .flux import FluxSpec
from .observers import SnapshotWriter
from .solver import SimulationAborted, Trajectory, run
from .systems import SystemSpec, run_system

CONVERGENCE_COLUMNS = ("level", "dx", "epsilon", "width", "peak_pos", "peak_neg", "net_mass", "location")


def version_string() -> str:
    """``git describe`` of the source tree, or the installed package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "unknown"


def output_root(default: Optional[str] = None) -> Path:
    env = os.environ.get("DELTASHOCK_OUT")
    return Path(env or default or "out")


def simulate(cfg: RunConfig, observers: Sequence = (), keep_frames: bool = True,
             frame_times: Optional[Sequence[float]] = None, stride: Optional[int] = None) -> Trajectory:
    """Integrate ``cfg`` and return the trajectory; aborts come back flagged, not raised."""
    initial = cfg.initial_state()
    frame_times = cfg.snapshot_times if frame_times is None else frame_times
    stride = cfg.stride if stride is None else stride
    scheme = cfg.scheme_config()
    # collect the partial trajectory instead of raising
    try:
        if cfg.system is not None:
            spec = SystemSpec(cfg.system.kind, cfg.system.eta, flux=FluxSpec(cfg.flux.family))
            return run_system(initial, spec, scheme, cfg.t_end, observers=observers,
                              stride=stride, frame_times=frame_times)
        return run(initial, cfg.flux_spec(), cfg.irregularization_spec(), cfg.spectral_filter(),
                   scheme, cfg.t_end, observers=observers, stride=stride,
                   frame_times=frame_times, keep_frames=keep_frames)
    except SimulationAborted as err:
        return err.trajectory


@dataclass
class RunResult:
    config: RunConfig
    trajectory: Trajectory
    directory: Path
    manifest: dict = field(default_factory=dict)


def run_config(cfg: RunConfig, outdir=None) -> RunResult:
    """Run one config, writing ``snap_*.csv`` per recorded frame plus ``manifest.json``."""
    root = output_root(outdir or cfg.output) / cfg.name
    root.mkdir(parents=True, exist_ok=True)
    writer = SnapshotWriter(str(root))
    traj = simulate(cfg, observers=[writer], keep_frames=False)
    if traj.aborted:
        # the last finite state is appended after observers stop being called
        last = traj.frames[-1]
        if not writer.times or writer.times[-1] != last.time:
            writer(last)
    init = cfg.initial_state()
    manifest = {
        "config": cfg.to_dict(),
        "version": version_string(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "wall_seconds": traj.wall_seconds,
        "steps": traj.steps,
        "aborted": traj.aborted,
        "abort_reason": traj.abort_reason,
        "dt": {k: traj.summary()[k] for k in ("dt_min", "dt_max", "dt_mean")},
        "dt_policy": cfg.scheme_config().dt_policy,
        "final_time": traj.final.time,
        "mass_initial": [float(m) for m in total_mass(init)],
        "mass_final": [float(m) for m in total_mass(traj.final)],
        "snapshots": [os.path.basename(p) for p in writer.paths],
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (root / "config.yaml").write_text(dumps(cfg))
    return RunResult(cfg, traj, root, manifest)


def run_preset_fig1(outdir=None) -> list[RunResult]:
    """Viscous, dispersive and irregularized runs from the same sinusoid."""
    return [run_config(c, outdir) for c in preset("fig1")]


# -- convergence ---------------------------------------------------------------

def _level_row(args):
    j, cfg = args
    traj = simulate(cfg, keep_frames=False, frame_times=())
    eps = cfg.irregularization.epsilon
    rep = detect_spike(traj.final, epsilon=eps)
    row = {"level": j, "dx": cfg.dx, "epsilon": eps}
    for key in CONVERGENCE_COLUMNS[3:]:
        row[key] = getattr(rep, key) if rep is not None else math.nan
    return row, traj.aborted, traj.abort_reason, traj.final.time, traj.wall_seconds


@dataclass
class ConvergenceResult:
    rows: list
    summary: dict
    csv_path: Optional[Path] = None


def _ratios(values):
    return [values[j + 1] / values[j] if values[j] else math.nan for j in range(len(values) - 1)]


def converge_study(spec: ConvergenceSpec, outdir=None, workers: int = 1) -> ConvergenceResult:
    """Run every level and tabulate the spike report of each final state.

    Levels that abort still contribute a row (from their last finite state)
    and are flagged in the summary.
    """
    jobs = list(enumerate(spec.configs()))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_level_row, jobs))
    else:
        results = [_level_row(j) for j in jobs]
    rows = [r[0] for r in results]
    widths = [r["width"] for r in rows]
    peaks = [r["peak_pos"] for r in rows]
    locs = [r["location"] for r in rows]
    masses = [r["net_mass"] for r in rows]
    summary = {
        "ratio_dx_over_sqrt_eps": spec.ratio,
        "levels": spec.levels,
        "width_ratios": _ratios(widths),
        "peak_ratios": _ratios(peaks),
        "location_drift": max(abs(x - locs[0]) for x in locs),
        "location_drift_over_dx0": max(abs(x - locs[0]) for x in locs) / spec.base_dx,
        "net_mass_relative_drift": max(abs(m - masses[0]) / abs(masses[0]) for m in masses)
        if masses[0] else math.nan,
        "aborted": [r[1] for r in results],
        "abort_reasons": [r[2] for r in results],
        "final_times": [r[3] for r in results],
        "wall_seconds": [r[4] for r in results],
    }
    result = ConvergenceResult(rows, summary)
    if outdir is not None or os.environ.get("DELTASHOCK_OUT"):
        root = output_root(outdir) / spec.template.name
        root.mkdir(parents=True, exist_ok=True)
        result.csv_path = write_convergence_csv(rows, root / "convergence.csv")
        (root / "convergence_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return result


def write_convergence_csv(rows, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_COLUMNS)
        for r in rows:
            w.writerow([r["level"]] + [format(float(r[k]), ".17g") for k in CONVERGENCE_COLUMNS[1:]])
    return path


# -- asymptotics and snapshot analysis -----------------------------------------

def asymptotic_overlay(cfg: RunConfig, t: float, outdir=None, with_simulation: bool = False) -> dict:
    """Write the predicted profile (JSON) and a sampled overlay CSV.

    With ``with_simulation`` the config is also run to ``t`` and its state is
    added as a column.
    """
    initial = cfg.initial_state()
    prof = asymptotic_profile(initial, cfg.irregularization.epsilon, t)
    x = initial.x
    cols = {"x": x, "u_asymptotic": prof.evaluate(x), "u_linear": prof.linear(x)}
    if with_simulation:
        traj = simulate(cfg.replace(t_end=float(t), snapshot_times=()), keep_frames=False)
        cols["u_simulated"] = traj.final.u
    root = output_root(outdir or cfg.output) / cfg.name
    root.mkdir(parents=True, exist_ok=True)
    (root / f"asymptotic_t{t:g}.json").write_text(json.dumps(prof.to_dict(), indent=2) + "\n")
    with open(root / f"overlay_t{t:g}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([format(float(v), ".17g") for v in row])
    return {"profile": prof.to_dict(), "directory": str(root)}


def analyze_state(state: FieldState, epsilon: Optional[float] = None, threshold: float = 1.0) -> dict:
    rep = detect_spike(state, threshold=threshold, epsilon=epsilon)
    return {
        "time": state.time,
        "cells": state.grid.cells,
        "max": float(state.u.max()),
        "min": float(state.u.min()),
        "mass": [float(m) for m in total_mass(state)],
        "zero_crossings": [{"position": c.position, "direction": c.direction} for c in zero_crossings(state)],
        "spike": rep.to_dict() if rep is not None else None,
    }


def analyze_snapshot(path, epsilon: Optional[float] = None, threshold: float = 1.0) -> dict:
    out = analyze_state(read_snapshot(path), epsilon, threshold)
    out["snapshot"] = str(path)
    return out
