"""How stationary is a discrete cosh cap?

The profile alpha*cosh(x/(alpha*sqrt(eps))) makes the modified flux exactly
constant, so the continuous problem leaves it at rest. Here it is evolved on a
window of +-4 widths with the exterior frozen, at several resolutions, and the
relative Linf change after time T is reported.
"""

import argparse
import math

import numpy as np

from deltashock.core import make_grid, sample
from deltashock.flux import FluxSpec, IrregularizationSpec
from deltashock.solver import SchemeConfig, SpectralFilter, frozen_boundary_rhs, integrate


def probe(alpha, eps, cells_per_width, t_end, half_widths=4.0):
    a = alpha * math.sqrt(eps)
    dx = a / cells_per_width
    n = int(round(2 * half_widths * a / dx))
    g = make_grid(2 * half_widths * a, n, origin=-half_widths * a)
    prof = lambda x: alpha * np.cosh(x / a)
    u0 = sample(prof, g)
    rhs = frozen_boundary_rhs(prof(g.centers[0] - dx), prof(g.centers[-1] + dx), dx,
                              FluxSpec("hopf"), IrregularizationSpec("rational", eps))
    traj = integrate(u0, rhs, lambda w: float(np.max(np.abs(w))), SpectralFilter(),
                     SchemeConfig(abort_on_nonfinite=False), t_end, stride=0)
    u = traj.final.u
    return {
        "cells": n,
        "change": float(np.max(np.abs(u - u0.u)) / np.max(np.abs(u0.u))),
        "mass_drift": float(g.dx * (u.sum() - u0.u.sum())),
        "aborted": traj.aborted,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--t", type=float, default=0.1)
    ap.add_argument("--resolutions", type=int, nargs="*", default=[5, 10, 20, 40, 80])
    args = ap.parse_args()

    prev = None
    for m in args.resolutions:
        r = probe(args.alpha, args.eps, m, args.t)
        rate = "" if prev is None else f"  ratio {prev / r['change']:.2f}"
        print(f"{m:4d} cells/width  n={r['cells']:5d}  rel change {r['change']:.3e}{rate}")
        prev = r["change"]


if __name__ == "__main__":
    main()
