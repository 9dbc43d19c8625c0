"""Shared driver for the sweep scripts: run a preset, save CSV + JSON, print a table."""

import argparse
from pathlib import Path

from activeris import cli

ROOT = Path(__file__).resolve().parent.parent


def run_preset(preset: str, description: str) -> None:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per point (preset: 200)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", default=str(ROOT / "results" / f"{preset}.csv"))
    args = parser.parse_args()

    argv = ["sweep", "--config", str(ROOT / "configs" / f"{preset}.cfg"), "--out", args.out,
            "--workers", str(args.workers)]
    if args.trials is not None:
        argv += ["--trials", str(args.trials)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    if cli.main(argv) != 0:
        raise SystemExit(1)
    print_table(Path(args.out))


def print_table(csv_path: Path) -> None:
    rows = [line.split(",") for line in csv_path.read_text().splitlines()[1:]]
    values = list(dict.fromkeys(r[0] for r in rows))
    plans = list(dict.fromkeys(r[1] for r in rows))
    mean = {(r[0], r[1]): float(r[2]) for r in rows}
    print(f"{'value':>12s}" + "".join(f"{p:>20s}" for p in plans))
    for v in values:
        print(f"{float(v):12.4g}" + "".join(f"{mean[v, p]:20.3f}" for p in plans))
