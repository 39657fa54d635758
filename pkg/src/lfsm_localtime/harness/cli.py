"""Command line: ``run``, ``list-scenarios`` and ``validate``.

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import ConfigurationError
from .config import load_config
from .runner import run_experiment
from .scenarios import SCENARIOS


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lfsm-localtime", description="Monte Carlo experiment runner.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--seed", type=int, default=None, help="replace master_seed")
    run.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list-scenarios", help="list scenario names")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    val.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return p


def _load(args):
    overrides = list(args.override)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"master_seed={args.seed}")
    cfg = load_config(args.config, overrides)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, sc in SCENARIOS.items():
            print(f"{name}\t{sc.description}")
        return 0
    try:
        cfg = _load(args)
    except ConfigurationError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {cfg.scenario} (config hash {cfg.config_hash()})")
        return 0
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return 2
    report = run_experiment(cfg, workers=args.workers, out_dir=args.out)
    for name, v in report.verdicts.items():
        status = "PASS" if v["pass"] else "FAIL"
        print(f"{status} {cfg.scenario}.{name}: value={json.dumps(v['value'], default=str)} "
              f"threshold={json.dumps(v['threshold'], default=str)}")
    return 0 if report.all_pass else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
