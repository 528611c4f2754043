"""Run every config in scripts/configs/ and print a one-line status for each.

    python3 scripts/run_config.py [--out results] [names...]
"""

import argparse
from pathlib import Path

from flab.config import parse_config
from flab.experiments import run_experiment

HERE = Path(__file__).parent / "configs"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", help="config stems (default: all)")
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    paths = sorted(HERE.glob("*.json"))
    if args.names:
        paths = [p for p in paths if p.stem in args.names]
    for path in paths:
        cfg = parse_config(path.read_text())
        status = run_experiment(cfg, args.out / path.stem)
        print(f"{path.stem:28s} exit={status}")


if __name__ == "__main__":
    main()
