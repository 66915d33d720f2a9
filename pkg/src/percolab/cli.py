"""Command-line entry point: one subcommand per experiment.

Exit codes: 0 = every asserted check passed, 2 = a statistical check
failed, 1 = configuration or runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import EXPERIMENTS, ConfigError, ExperimentConfig, InvalidationError, run_experiment


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="percolab",
        description="Run a percolab experiment and write ensemble.csv, report.csv, summary.txt.",
    )
    sub = ap.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON config file (documented schema; flat key-value)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--replicates", type=int, help="override the replicate count")
        sp.add_argument("--out", help="output directory")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = ExperimentConfig.from_json(args.config)
            if cfg.experiment != args.experiment:
                raise ConfigError(
                    f"config names experiment {cfg.experiment!r} but subcommand is {args.experiment!r}"
                )
        else:
            cfg = ExperimentConfig(experiment=args.experiment)
        overrides = {}
        for field in ("seed", "replicates", "out"):
            value = getattr(args, field)
            if value is not None:
                overrides[field] = value
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        result = run_experiment(cfg)
        for name, path in sorted(result["paths"].items()):
            print(f"wrote {path}")
        if result["failed"]:
            print("status: FAIL (see report.csv)", file=sys.stderr)
            return 2
        return 0
    except (ConfigError, InvalidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
