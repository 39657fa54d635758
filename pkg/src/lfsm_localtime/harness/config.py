"""Experiment configuration: a JSON tree with per-scenario defaults."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

from ..errors import ConfigurationError
from ..innovations import InnovationModel
from ..linear_process import ProcessSpec

__all__ = [
    "ExperimentConfig",
    "SCENARIO_NAMES",
    "apply_overrides",
    "load_config",
]

SCENARIO_NAMES = (
    "local_time_law",
    "mass_identity",
    "holder_increments",
    "zero_energy_scaling",
    "decomposition_identity",
    "norm_inequalities",
    "support_coverage",
    "regression_uniform",
    "lfsm_sanity",
)

DEFAULT_SEED = 20240611


@dataclass
class ExperimentConfig:
    scenario: str
    model: dict = field(default_factory=dict)
    spec: dict = field(default_factory=dict)
    n_ladder: list = field(default_factory=list)
    replications: int = 1
    master_seed: int = DEFAULT_SEED
    params: dict = field(default_factory=dict)
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        from .scenarios import SCENARIOS

        d = copy.deepcopy(d)
        unknown = set(d) - {"scenario", "model", "spec", "n_ladder", "replications",
                            "master_seed", "params", "output_dir"}
        if unknown:
            raise ConfigurationError([f"unknown config key {k!r}" for k in sorted(unknown)])
        name = d.get("scenario")
        if name not in SCENARIO_NAMES:
            raise ConfigurationError(f"scenario must be one of {SCENARIO_NAMES}, got {name!r}")
        defaults = SCENARIOS[name].defaults
        params = {**defaults.get("params", {}), **d.get("params", {})}
        return cls(
            scenario=name,
            model={**defaults.get("model", {}), **d.get("model", {})},
            spec={**defaults.get("spec", {}), **d.get("spec", {})},
            n_ladder=list(d.get("n_ladder", defaults.get("n_ladder", []))),
            replications=d.get("replications", defaults.get("replications", 1)),
            master_seed=d.get("master_seed", DEFAULT_SEED),
            params=params,
            output_dir=d.get("output_dir"),
        )

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "model": self.model,
            "spec": self.spec,
            "n_ladder": self.n_ladder,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "params": self.params,
            "output_dir": self.output_dir,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON, excluding the output directory."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def innovation_model(self) -> InnovationModel:
        return InnovationModel(**self.model)

    def process_spec(self) -> ProcessSpec:
        spec = dict(self.spec)
        if "phi" in spec:
            spec["phi"] = tuple(spec["phi"])
        spec.setdefault("alpha", self.model.get("alpha", 2.0))
        return ProcessSpec(**spec)

    def problems(self) -> list[str]:
        from .scenarios import SCENARIOS

        out = []
        R = self.replications
        if not isinstance(R, int) or isinstance(R, bool) or R < 1:
            out.append(f"replications must be an integer >= 1, got {R!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            out.append(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        lad = self.n_ladder
        if not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in lad):
            out.append(f"n_ladder entries must be integers >= 1, got {lad!r}")
        elif any(b <= a for a, b in zip(lad[:-1], lad[1:])):
            out.append(f"n_ladder must be strictly increasing, got {lad!r}")
        try:
            InnovationModel(**self.model)
        except ConfigurationError as exc:
            out.extend(f"model: {p}" for p in exc.problems)
        except TypeError as exc:
            out.append(f"model: {exc}")
        try:
            self.process_spec()
        except ConfigurationError as exc:
            out.extend(f"spec: {p}" for p in exc.problems)
        except TypeError as exc:
            out.append(f"spec: {exc}")
        if self.model.get("alpha", 2.0) != self.spec.get("alpha", self.model.get("alpha", 2.0)):
            out.append("spec.alpha must equal model.alpha")
        out.extend(SCENARIOS[self.scenario].check(self))
        return out

    def validate(self) -> "ExperimentConfig":
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)
        return self


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d: dict, overrides) -> dict:
    """Apply ``key.sub=value`` overrides; values are parsed as JSON when possible."""
    d = copy.deepcopy(d)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = d
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"override {item!r}: {p!r} is not a block")
        node[parts[-1]] = _parse_value(text)
    return d


def load_config(path, overrides=()) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file {path!s} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path!s} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(apply_overrides(raw, overrides))
