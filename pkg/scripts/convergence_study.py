"""Joint dx / sqrt(eps) refinement of the fig4 preset, with CSV output.

Prints the table plus the ratios that should approach 1/2 (width) and 2 (peak).
"""

import argparse

from deltashock.config import ConvergenceSpec, preset
from deltashock.experiments import CONVERGENCE_COLUMNS, converge_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    spec = ConvergenceSpec(preset("fig4")[0], args.levels)
    res = converge_study(spec, args.out, workers=args.workers)
    print(" ".join(f"{c:>12s}" for c in CONVERGENCE_COLUMNS))
    for row in res.rows:
        print(" ".join(f"{row[c]:12.5g}" for c in CONVERGENCE_COLUMNS))
    s = res.summary
    print("width ratios", [round(r, 4) for r in s["width_ratios"]])
    print("peak ratios ", [round(r, 4) for r in s["peak_ratios"]])
    print(f"location drift {s['location_drift_over_dx0']:.3f} dx0, net mass drift {s['net_mass_relative_drift']:.2%}")
    print("csv:", res.csv_path)


if __name__ == "__main__":
    main()
