"""Reproduce the four figure runs and write their snapshots under OUT/<name>/.

    python scripts/run_figures.py --out out fig1 fig2 fig3
    python scripts/run_figures.py --out out fig4      # refinement ladder
"""

import argparse
import json

from deltashock.config import ConvergenceSpec, preset
from deltashock.experiments import analyze_state, asymptotic_overlay, converge_study, run_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("figures", nargs="*", default=["fig1", "fig2", "fig3", "fig4"])
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    for name in args.figures:
        cfgs = preset(name)
        if name == "fig4":
            res = converge_study(ConvergenceSpec.from_config(cfgs[0]), args.out)
            print(json.dumps(res.summary, indent=2))
            continue
        for cfg in cfgs:
            res = run_config(cfg, args.out)
            rep = analyze_state(res.trajectory.final, cfg.irregularization.epsilon or None)
            print(f"{cfg.name}: t={res.trajectory.final.time:.4g} steps={res.trajectory.steps} "
                  f"max={rep['max']:.4g} min={rep['min']:.4g} spike={rep['spike'] is not None}")
            if name == "fig3":
                asymptotic_overlay(cfg, cfg.t_end, args.out)


if __name__ == "__main__":
    main()
