"""Spike onset versus grid spacing at fixed eps.

The u_x dependence of the flux acts like a diffusion coefficient
u^2 eps u_x / (1 + eps u_x^2)^2, which is negative on decreasing flanks. First
order upwinding adds roughly |u| dx / 2, so a grid is stable on the smooth
profile only while dx >~ 2 eps max|u u_x| / (1 + eps u_x^2)^2. Finer grids
break up before the classical breaking time 1/(2 pi) of sin(2 pi x).
"""

import argparse
import math

import numpy as np

from deltashock.analysis import detect_spike
from deltashock.core import make_grid, sample
from deltashock.flux import FluxSpec, IrregularizationSpec
from deltashock.observers import MaxTracker
from deltashock.solver import SchemeConfig, SpectralFilter, run


def onset(eps, cells, t_end, offset=0.0):
    g = make_grid(1.0, cells)
    u0 = sample(lambda x: np.sin(2 * np.pi * x) + offset, g)
    tracker = MaxTracker()
    traj = run(u0, FluxSpec("hopf"), IrregularizationSpec("rational", eps), SpectralFilter(),
               SchemeConfig(abort_on_nonfinite=False), t_end, observers=[tracker], stride=5,
               keep_frames=False)
    # first overshoot of the initial maximum by 1 %
    hit = np.nonzero(np.array(tracker.maxima) > 1.01 * tracker.maxima[0])[0]
    t_on = tracker.times[hit[0]] if len(hit) else math.nan
    rep = detect_spike(traj.final)
    u = traj.final.u
    peaks = int(np.sum((u > np.roll(u, 1)) & (u >= np.roll(u, -1)) & (u > 2 * u0.u.max())))
    return t_on, peaks, rep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, default=1e-5)
    ap.add_argument("--cells", type=int, nargs="*", default=[250, 500, 1000, 2000, 4000, 8000])
    ap.add_argument("--t", type=float, default=0.25)
    args = ap.parse_args()

    t_break = 1 / (2 * math.pi)
    # largest |u u_x| weight on the sinusoid, with u_x up to 2 pi
    s = np.linspace(0, 2 * np.pi, 2001)
    x = np.linspace(0, 1, 2001)
    w = np.max(np.abs(np.sin(2 * np.pi * x)[:, None] * s[None, :]) / (1 + args.eps * s[None, :] ** 2) ** 2)
    print(f"eps={args.eps:g}  breaking time {t_break:.4f}  stability estimate dx >~ {2 * args.eps * w:.2e}")
    for n in args.cells:
        t_on, peaks, rep = onset(args.eps, n, args.t)
        early = "early" if t_on < t_break else "after breaking"
        print(f"n={n:6d} dx/sqrt(eps)={1 / n / math.sqrt(args.eps):6.3f}  onset t={t_on:.4f} ({early})  "
              f"spikes above 2*max u0: {peaks}  detected: {rep is not None}")


if __name__ == "__main__":
    main()
