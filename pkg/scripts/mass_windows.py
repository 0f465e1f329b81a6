"""Mass between tracked zero crossings for the fig3 preset.

Prints crossing drift (in cells) and the relative change of the positive and
negative window masses at every 0.02 time units, marking the gradient onset.
"""

import argparse
import math

import numpy as np

from deltashock.analysis import mass_between, zero_crossings
from deltashock.config import preset
from deltashock.experiments import simulate


def windows(state):
    c = {q.direction: q.position for q in zero_crossings(state)}
    up = c["upward"]
    down = c["downward"] if c["downward"] < up else c["downward"] - state.grid.length
    L = state.grid.length
    return up, down, mass_between(state, up, down + L), mass_between(state, down, up)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int)
    ap.add_argument("--eps", type=float)
    ap.add_argument("--t", type=float, default=0.5)
    args = ap.parse_args()

    cfg = preset("fig3")[0]
    if args.cells:
        cfg = cfg.replace(grid=cfg.grid.__class__(cfg.grid.length, args.cells, cfg.grid.origin))
    if args.eps:
        cfg = cfg.replace(irregularization=cfg.irregularization.__class__("rational", args.eps))
    eps = cfg.irregularization.epsilon
    times = np.round(np.arange(0.02, args.t + 1e-9, 0.02), 4)
    traj = simulate(cfg.replace(t_end=args.t, snapshot_times=()), frame_times=times, stride=0)
    up0, down0, P0, N0 = windows(traj.frames[0])
    dx = traj.frames[0].grid.dx
    flagged = False
    for f in traj.frames:
        up, down, P, N = windows(f)
        mark = ""
        if not flagged and np.max(np.abs(np.diff(f.u))) / dx > 1 / (2 * math.sqrt(eps)):
            mark, flagged = "  <- gradient onset", True
        print(f"t={f.time:.3f} d_up={(up - up0) / dx:+.3f} d_down={(down - down0) / dx:+.3f} "
              f"dP/P={P / P0 - 1:+.2e} dN/N={N / N0 - 1:+.2e}{mark}")


if __name__ == "__main__":
    main()
