"""Monte Carlo experiment harness."""

from .config import SCENARIO_NAMES, ExperimentConfig, apply_overrides, load_config
from .runner import Report, monte_carlo, read_reps_csv, recompute_verdicts, replication_seed, run_experiment

__all__ = [
    "ExperimentConfig",
    "Report",
    "SCENARIO_NAMES",
    "apply_overrides",
    "load_config",
    "monte_carlo",
    "read_reps_csv",
    "recompute_verdicts",
    "replication_seed",
    "run_experiment",
]
