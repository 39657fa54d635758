"""Replication fan-out, aggregation and report files.

Replication ``r`` draws from ``SeedSequence(master_seed, spawn_key=(r,))``,
so its randomness does not depend on the worker count or on which other
replications run.  Records are gathered and aggregated in ``r`` order.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import ConfigurationError
from .config import ExperimentConfig
from .scenarios import SCENARIOS

__all__ = [
    "Report",
    "monte_carlo",
    "read_reps_csv",
    "recompute_verdicts",
    "replication_seed",
    "run_experiment",
    "seed_label",
]


class InjectedFailure(RuntimeError):
    """Raised on purpose for replications listed in ``inject_failures``."""


def replication_seed(master_seed: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(r,))


def seed_label(seed: np.random.SeedSequence) -> int:
    """A 64-bit fingerprint of a replication seed."""
    return int(seed.generate_state(1, np.uint64)[0])


def _one(args):
    cfg, r, inject = args
    seed = replication_seed(cfg.master_seed, r)
    rec = {"r": r, "seed": seed_label(seed), "status": "ok", "error": "", "outputs": {}}
    try:
        if r in inject:
            raise InjectedFailure(f"injected failure in replication {r}")
        rec["outputs"] = SCENARIOS[cfg.scenario].replicate(cfg, r, seed)
    except Exception as exc:  # a failing replication is recorded, not fatal
        rec["status"] = "failed"
        rec["error"] = f"{type(exc).__name__}: {exc}"
        rec["traceback"] = traceback.format_exc(limit=3)
    return rec


def monte_carlo(cfg: ExperimentConfig, workers: int = 1, fail_replications=()) -> list[dict]:
    """Run every replication; results come back in replication order."""
    inject = frozenset(fail_replications) | frozenset(cfg.params.get("inject_failures", []))
    jobs = [(cfg, r, inject) for r in range(cfg.replications)]
    if workers <= 1 or cfg.replications == 1:
        return [_one(j) for j in jobs]
    chunk = max(1, cfg.replications // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, jobs, chunksize=chunk))


@dataclass
class Report:
    config: ExperimentConfig
    summary: dict
    verdicts: dict
    records: list
    fingerprint: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [r for r in self.records if r["status"] != "ok"]

    @property
    def successes(self) -> list:
        return [r for r in self.records if r["status"] == "ok"]

    @property
    def all_pass(self) -> bool:
        return bool(self.verdicts) and all(v["pass"] for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "scenario": self.config.scenario,
            "fingerprint": self.fingerprint,
            "config": self.config.to_dict(),
            "replications": len(self.records),
            "failed": len(self.failures),
            "failures": [{"r": r["r"], "seed": r["seed"], "error": r["error"]} for r in self.failures],
            "summary": self.summary,
            "verdicts": self.verdicts,
            "all_pass": self.all_pass,
        }


def _aggregate(cfg, records):
    outputs = [r["outputs"] for r in records if r["status"] == "ok"]
    if not outputs:
        return {}, {"replications": {"pass": False, "value": 0, "threshold": 1,
                                     "detail": "no replication succeeded"}}, {}
    try:
        summary, verdicts, plots = SCENARIOS[cfg.scenario].summarize(cfg, outputs)
    except Exception as exc:
        return {}, {"summary": {"pass": False, "value": None, "threshold": None,
                                "detail": f"{type(exc).__name__}: {exc}"}}, {}
    failed = len(records) - len(outputs)
    verdicts = dict(verdicts)
    verdicts["replications_ok"] = {"pass": failed == 0, "value": failed, "threshold": 0,
                                   "detail": "failed replications"}
    return summary, verdicts, plots


def run_experiment(cfg: ExperimentConfig, workers: int = 1, out_dir=None, fail_replications=()) -> Report:
    """Validate, run, aggregate and (when an output directory is known) write files."""
    cfg.validate()
    records = monte_carlo(cfg, workers, fail_replications)
    summary, verdicts, plots = _aggregate(cfg, records)
    fingerprint = {
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "master_seed": cfg.master_seed,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    report = Report(cfg, summary, verdicts, records, fingerprint)
    out_dir = out_dir or cfg.output_dir
    if out_dir:
        _write(report, plots, out_dir)
    return report


# -- files ------------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _header(report) -> str:
    fp = report.fingerprint
    return f"# config_hash={fp['config_hash']} scenario={report.config.scenario} version={fp['version']}\n"


def _write(report: Report, plots: dict, out_dir) -> None:
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(_jsonable(report.to_dict()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    keys = sorted({k for r in report.records for k in r["outputs"]})
    with open(os.path.join(out_dir, "reps.csv"), "w", newline="") as fh:
        fh.write(_header(report))
        w = csv.writer(fh)
        w.writerow(["r", "seed", "status", "error"] + keys)
        for rec in report.records:
            w.writerow([rec["r"], rec["seed"], rec["status"], rec["error"]]
                       + [_cell(rec["outputs"].get(k)) for k in keys])
    for name, plot in plots.items():
        base = os.path.join(out_dir, "plots", name)
        with open(base + ".csv", "w", newline="") as fh:
            fh.write(_header(report))
            w = csv.writer(fh)
            w.writerow(plot["columns"])
            for row in plot["rows"]:
                w.writerow([_cell(v) for v in row])
        meta = {"config_hash": report.fingerprint["config_hash"], "scenario": report.config.scenario,
                "columns": plot["columns"], **plot.get("meta", {})}
        with open(base + ".json", "w") as fh:
            json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_reps_csv(path) -> list[dict]:
    """Records as written to ``reps.csv`` (outputs parsed back to numbers)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    out = []
    for row in rows:
        outputs = {}
        for k, v in row.items():
            if k in ("r", "seed", "status", "error") or v == "":
                continue
            outputs[k] = float(v)
        out.append({"r": int(row["r"]), "seed": int(row["seed"]), "status": row["status"],
                    "error": row["error"], "outputs": outputs})
    return out


def recompute_verdicts(cfg: ExperimentConfig, reps_path) -> dict:
    """Verdicts from a ``reps.csv`` alone."""
    return _aggregate(cfg, read_reps_csv(reps_path))[1]


def check_config(cfg: ExperimentConfig) -> list[str]:
    try:
        return cfg.problems()
    except ConfigurationError as exc:
        return exc.problems
