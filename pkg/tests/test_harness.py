from __future__ import annotations

import json
from pathlib import Path

import pytest

from lfsm_localtime.errors import ConfigurationError
from lfsm_localtime.harness import (
    SCENARIO_NAMES,
    ExperimentConfig,
    apply_overrides,
    load_config,
    read_reps_csv,
    recompute_verdicts,
    replication_seed,
    run_experiment,
)
from lfsm_localtime.harness.cli import main
from lfsm_localtime.harness.runner import seed_label

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _cheap(**kw):
    d = {"scenario": "mass_identity", "n_ladder": [200, 400], "replications": 3, **kw}
    return ExperimentConfig.from_dict(d)


def test_every_shipped_config_validates():
    names = set()
    for path in CONFIGS.glob("*.json"):
        names.add(load_config(path).validate().scenario)
    assert names == set(SCENARIO_NAMES)


def test_fault_injection_is_recorded():
    rep = run_experiment(_cheap(), fail_replications=[2])
    assert len(rep.successes) == 2 and len(rep.failures) == 1
    assert rep.failures[0]["r"] == 2 and "InjectedFailure" in rep.failures[0]["error"]
    assert not rep.verdicts["replications_ok"]["pass"]
    assert rep.verdicts["closed_form_mass"]["pass"]


def test_injection_through_config():
    rep = run_experiment(_cheap(params={"inject_failures": [0, 1, 2]}))
    assert len(rep.failures) == 3
    assert list(rep.verdicts) == ["replications"] and not rep.all_pass


def test_seeds_distinct():
    labels = {seed_label(replication_seed(7, r)) for r in range(10_000)}
    assert len(labels) == 10_000
    assert seed_label(replication_seed(7, 3)) == seed_label(replication_seed(7, 3))


def test_rerun_is_byte_identical(tmp_path):
    cfg = _cheap()
    run_experiment(cfg, out_dir=tmp_path / "a")
    run_experiment(cfg, out_dir=tmp_path / "b")
    for name in ("reps.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    head = (tmp_path / "a" / "reps.csv").read_text().splitlines()[0]
    assert head.startswith(f"# config_hash={cfg.config_hash()}")


def test_recompute_verdicts_from_csv(tmp_path):
    cfg = _cheap()
    rep = run_experiment(cfg, out_dir=tmp_path)
    again = recompute_verdicts(cfg, tmp_path / "reps.csv")
    assert {k: v["pass"] for k, v in again.items()} == {k: v["pass"] for k, v in rep.verdicts.items()}
    assert [r["seed"] for r in read_reps_csv(tmp_path / "reps.csv")] == [r["seed"] for r in rep.records]


def test_validation_lists_every_problem():
    cfg = ExperimentConfig.from_dict({"scenario": "mass_identity", "replications": 0,
                                      "n_ladder": [100, 50], "master_seed": -1})
    with pytest.raises(ConfigurationError) as info:
        cfg.validate()
    text = " ".join(info.value.problems)
    assert len(info.value.problems) >= 3
    for word in ("replications", "master_seed", "n_ladder"):
        assert word in text


def test_unknown_keys_and_scenarios():
    with pytest.raises(ConfigurationError, match="unknown config key"):
        ExperimentConfig.from_dict({"scenario": "mass_identity", "replicatoins": 2})
    with pytest.raises(ConfigurationError, match="scenario"):
        ExperimentConfig.from_dict({"scenario": "nope"})


def test_overrides():
    d = apply_overrides({"scenario": "mass_identity"}, ["replications=5", "params.h=0.5", "params.kernel=gaussian"])
    assert d == {"scenario": "mass_identity", "replications": 5, "params": {"h": 0.5, "kernel": "gaussian"}}
    with pytest.raises(ConfigurationError):
        apply_overrides({}, ["novalue"])


def test_config_hash_ignores_output_dir():
    assert _cheap().config_hash() == _cheap(output_dir="/tmp/x").config_hash()
    assert _cheap().config_hash() != _cheap(master_seed=1).config_hash()


def test_mass_identity_single_replication():
    rep = run_experiment(load_config(CONFIGS / "mass_identity.json", ["replications=1"]))
    assert rep.all_pass


def test_cli_exit_codes(tmp_path, capsys):
    cfg = str(CONFIGS / "mass_identity.json")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "ok")]) == 0
    assert "PASS mass_identity.closed_form_mass" in capsys.readouterr().out
    assert (tmp_path / "ok" / "summary.json").exists()
    assert main(["run", "--config", cfg, "--override", "params.grid_tol=1e-30"]) == 1
    assert main(["run", "--config", cfg, "--override", "replications=0"]) == 2
    assert "replications" in capsys.readouterr().err
    assert main(["run", "--config", cfg, "--workers", "0"]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_listing_and_validate(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in SCENARIO_NAMES)
    assert main(["validate", "--config", str(CONFIGS / "tower_property.json")]) == 0
    assert "decomposition_identity" in capsys.readouterr().out


def test_cli_seed_flag(tmp_path):
    cfg = str(CONFIGS / "mass_identity.json")
    main(["run", "--config", cfg, "--seed", "5", "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["fingerprint"]["master_seed"] == 5
