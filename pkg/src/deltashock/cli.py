"""Command-line entry point: ``deltashock <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, ConvergenceSpec, dumps, load, preset, PRESETS
from .core import ValidationError
from .rh import NAMED_FLUXES, NoShockError, RiemannData, balance_at, classical_shock_speed


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _print_json(obj):
    print(json.dumps(obj, indent=2, default=float))


def cmd_run(args) -> int:
    from .experiments import run_config
    status = 0
    for cfg in load(args.config):
        res = run_config(cfg, args.out)
        m = res.manifest
        print(f"{cfg.name}: t={m['final_time']:.6g} steps={m['steps']} "
              f"wall={m['wall_seconds']:.2f}s aborted={m['aborted']} -> {res.directory}")
        status |= int(m["aborted"])
    return 3 if status else 0


def cmd_riemann(args) -> int:
    data = RiemannData(_floats(args.left), _floats(args.right))
    if args.sigma is None:
        bal = classical_shock_speed(args.flux, data)
    else:
        bal = balance_at(args.flux, data, args.sigma)
    out = {"flux": args.flux, "u_left": data.u_left.tolist(), "u_right": data.u_right.tolist()}
    out.update(bal.to_dict())
    _print_json(out)
    return 0


def cmd_converge(args) -> int:
    from .experiments import converge_study
    cfg = load(args.config)[0]
    spec = ConvergenceSpec(cfg, args.levels or (cfg.convergence.levels if cfg.convergence else 3))
    res = converge_study(spec, args.out or cfg.output, workers=args.workers)
    for row in res.rows:
        print(",".join(f"{row[k]:.6g}" if isinstance(row[k], float) else str(row[k]) for k in row))
    _print_json(res.summary)
    if res.csv_path:
        print(f"wrote {res.csv_path}")
    return 3 if any(res.summary["aborted"]) else 0


def cmd_asymptotic(args) -> int:
    from .experiments import asymptotic_overlay
    cfg = load(args.config)[0]
    out = asymptotic_overlay(cfg, args.t, args.out, with_simulation=args.simulate)
    _print_json(out)
    return 0


def cmd_analyze(args) -> int:
    from .experiments import analyze_snapshot
    _print_json(analyze_snapshot(args.snapshot, args.epsilon, args.threshold))
    return 0


def cmd_preset(args) -> int:
    text = dumps(preset(args.name))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deltashock", description="Irregularized Hopf simulations and delta-shock tools.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run every config document in FILE")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output root (DELTASHOCK_OUT overrides)")
    r.set_defaults(func=cmd_run)

    r = sub.add_parser("riemann", help="Rankine-Hugoniot balance for two states")
    r.add_argument("--flux", default="hopf", choices=sorted(NAMED_FLUXES))
    r.add_argument("--left", required=True, help="comma-separated components")
    r.add_argument("--right", required=True, help="comma-separated components")
    r.add_argument("--sigma", type=float, help="prescribed defect speed (0 = stationary)")
    r.set_defaults(func=cmd_riemann)

    r = sub.add_parser("converge", help="joint dx / sqrt(eps) refinement study")
    r.add_argument("--config", required=True)
    r.add_argument("--levels", type=int)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out")
    r.set_defaults(func=cmd_converge)

    r = sub.add_parser("asymptotic", help="piecewise linear-plus-cosh prediction at time T")
    r.add_argument("--config", required=True)
    r.add_argument("--t", type=float, required=True)
    r.add_argument("--simulate", action="store_true", help="also run the config and add it to the overlay")
    r.add_argument("--out")
    r.set_defaults(func=cmd_asymptotic)

    r = sub.add_parser("analyze", help="zero crossings and spike report of a snapshot")
    r.add_argument("--snapshot", required=True)
    r.add_argument("--epsilon", type=float, help="fit a cosh cap with this epsilon")
    r.add_argument("--threshold", type=float, default=1.0)
    r.set_defaults(func=cmd_analyze)

    r = sub.add_parser("preset", help="print the config for a figure")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (NoShockError, ValidationError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
