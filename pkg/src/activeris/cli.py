"""Command-line front end: ``activeris sweep`` and ``activeris single``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigFile, ConfigParseError
from .model import sinr_breakdown
from .orchestrator import get_plan, run
from .simulation import AggregateResult, configure, generate_channels, run_scenario, trial_seeds

log = logging.getLogger("activeris")

CSV_COLUMNS = ("sweep_value", "plan", "mean_rate", "std_rate", "n_trials")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(result: AggregateResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for pt in result.points:
            writer.writerow([_fmt(pt.sweep_value), pt.plan, _fmt(pt.mean_rate),
                             _fmt(pt.std_rate), str(pt.n_trials)])


def sidecar(conf: ConfigFile, result: AggregateResult) -> dict:
    return {
        "tool": "activeris",
        "version": __version__,
        "seed": conf.values["seed"],
        "config": conf.echo(),
        "points": [
            {
                "sweep_value": pt.sweep_value,
                "plan": pt.plan,
                "mean_rate": pt.mean_rate,
                "std_rate": pt.std_rate,
                "n_trials": pt.n_trials,
                "n_failed": pt.n_failed,
                "mean_loops": pt.mean_loops,
            }
            for pt in result.points
        ],
        "n_warnings": len(result.warnings),
    }


def _load(args) -> ConfigFile:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if getattr(args, "trials", None) is not None:
        overrides.append(f"trials={args.trials}")
    return ConfigFile.load(args.config, overrides)


def cmd_sweep(args) -> int:
    conf = _load(args)
    spec = conf.scenario()
    result = run_scenario(spec, workers=args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(result, out)
    out.with_suffix(".json").write_text(json.dumps(sidecar(conf, result), indent=2) + "\n")
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {out} and {out.with_suffix('.json')} ({len(result.points)} points)")
    return 0


def cmd_single(args) -> int:
    conf = _load(args)
    spec = conf.scenario()
    plan_name = args.plan or conf.values["plan"]
    plan = get_plan(plan_name)
    cfg = configure(spec.cfg, spec.sweep, spec.values[0])
    ch_seed, init_seed = trial_seeds(spec.seed, 0, 0)
    est = generate_channels(cfg, np.random.default_rng(ch_seed))
    rep = run(cfg, est, plan, init_seed)

    extra = f", {spec.sweep}={spec.values[0]}" if spec.sweep not in ("N", "K") else ""
    print(f"plan {plan.name}  (M={cfg.M}, N={cfg.N}, K={cfg.K}{extra}, seed={spec.seed})")
    print(f"initial sum-rate  {rep.initial_rate:.6f} bit/s/Hz")
    for i, r in enumerate(rep.trace, start=1):
        print(f"outer {i:3d}        {r:.6f}")
    bd = sinr_breakdown(plan.system(cfg), est, rep.resources, rep.ris)
    print("user  p[W]       signal       interference  ris_noise    csi_error    rx_noise     denominator  gamma")
    for k in range(cfg.K):
        denom = bd.interference[k] + bd.psi[k]
        print(f"{k:4d}  {rep.resources.p[k]:.4e}  {bd.signal[k]:.4e}  {bd.interference[k]:.4e}    "
              f"{bd.ris_noise[k]:.4e}  {bd.csi_error[k]:.4e}  {bd.rx_noise[k]:.4e}  {denom:.4e}  {bd.gamma[k]:.4e}")
    for block, counts in rep.loops.items():
        print(f"loops {block:12s} {' '.join(str(c) for c in counts)}")
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="activeris", description="Active-RIS uplink sum-rate optimiser")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario file (key = value lines) or a result JSON sidecar")
        p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")

    sw = sub.add_parser("sweep", help="Monte Carlo sweep; writes CSV plus JSON sidecar")
    common(sw)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--out", required=True, help="CSV path; the sidecar goes next to it as .json")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    si = sub.add_parser("single", help="one optimisation run with a per-user SINR breakdown")
    common(si)
    si.add_argument("--plan", help="plan name (defaults to the config's 'plan')")
    si.set_defaults(func=cmd_single)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
