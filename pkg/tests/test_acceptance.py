"""One test per acceptance criterion, each driven by a shipped config.

Every test prints a single ``PASS``/``FAIL`` line with the measured value.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from lfsm_localtime.harness import load_config, run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def report_line(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n} ({title}): {detail}")

    return emit


def _run(name, overrides=(), **kw):
    return run_experiment(load_config(CONFIGS / f"{name}.json", overrides), **kw)


def test_criterion_01_mass_identity(report_line):
    variants = [
        ["replications=5"],
        ["model.family=exact-stable", "model.alpha=1.5", "spec.alpha=1.5", "spec.case=b", "spec.H=0.8"],
        ["spec.case=c", "spec.H=0.25"],
    ]
    closed, grid, ok = 0.0, 0.0, True
    for ov in variants:
        rep = _run("mass_identity", ov)
        closed = max(closed, rep.summary["max_closed_residual"])
        grid = max(grid, rep.summary["max_grid_residual"])
        ok &= rep.all_pass
    report_line(1, "mass identity", ok,
                f"max closed-form error {closed:.2e} (<= 1e-12), max grid error {grid:.2e} (<= 1e-3)")
    assert ok and closed <= 1e-12 and grid <= 1e-3


def test_criterion_02_brownian_local_time_law(report_line):
    rep = _run("local_time_law")
    s = rep.summary
    report_line(2, "local-time law", rep.all_pass,
                f"mean {s['mean']:.4f} vs 1/sqrt(pi) = 0.5642 (rel. {rep.verdicts['mean_within_tol']['value']:.4f} <= 0.05), "
                f"KS p = {rep.verdicts['ks_not_rejected']['value']:.3f} (>= 0.01)")
    assert rep.all_pass


def test_criterion_03_decomposition_identity(report_line):
    rep = _run("decomposition_identity")
    ratio = rep.verdicts["reconstruction"]["value"]
    report_line(3, "martingale decomposition", rep.all_pass,
                f"max |S - N - sum M| / (1e-6 (1 + |S|)) = {ratio:.2e} over {len(rep.records)} reps")
    assert rep.all_pass and len(rep.successes) == 100


def test_criterion_04_tower_property(report_line):
    rep = _run("tower_property")
    gap = np.asarray(rep.summary["relative_gap"])
    report_line(4, "tower property", rep.all_pass,
                f"max_k |mean U - mean V| / mean V = {gap.max():.4f} at k = {int(gap.argmax())} (<= 0.05)")
    assert rep.all_pass


def test_criterion_05_holder_increments(report_line):
    rep = _run("holder_increments")
    slope = rep.verdicts["slope"]["value"]
    report_line(5, "Holder increments", rep.all_pass, f"fitted slope {slope:.3f} (>= 0.3)")
    assert rep.all_pass


def test_criterion_06_zero_energy_scaling(report_line):
    rep = _run("zero_energy_scaling")
    v = rep.verdicts
    report_line(6, "zero-energy scaling", rep.all_pass,
                f"variance slope {v['variance_slope']['value']:.3f} (in [0.8, 1.2]), "
                f"worst lattice ratio {v['lattice_envelope']['value']:.4f} (<= 1)")
    assert rep.all_pass


def test_criterion_07_norm_inequalities(report_line):
    rep = _run("norm_inequalities")
    counts = {k: rep.verdicts[k]["value"] for k in ("lemma_i", "lemma_ii", "lemma_iii")}
    report_line(7, "norm inequalities", rep.all_pass, f"violations {counts}")
    assert rep.all_pass


def test_criterion_08_support_coverage(report_line):
    rep = _run("support_coverage")
    s = rep.summary
    report_line(8, "support coverage", rep.all_pass,
                f"passing epsilons {s['passing_epsilons']}; (epsilon, mean coverage, floor share) "
                f"{[tuple(round(x, 4) for x in row) for row in s['per_epsilon']]}")
    assert rep.all_pass


def test_criterion_09_regression(report_line):
    rep = _run("regression_uniform")
    v = rep.verdicts
    report_line(9, "regression", rep.all_pass,
                f"constant error {v['constant_exact']['value']:.1e} (<= 1e-12), "
                f"decreasing share {v['sup_error_decreasing']['value']:.3f} (>= 0.8)")
    assert rep.all_pass


def test_criterion_10_lfsm_sanity(report_line):
    rep = _run("lfsm_sanity")
    s = rep.summary
    report_line(10, "LFSM simulator", rep.all_pass,
                f"Var X(1) = {s['var_X1']:.4f} (2 +- 5%), slope {s['slope']:.3f} (1.5 +- 0.1)")
    assert rep.all_pass


def test_criterion_11_determinism(report_line, tmp_path):
    blobs = {}
    for w in (1, 4, 16):
        _run("local_time_law", ["replications=64"], workers=w, out_dir=tmp_path / f"w{w}")
        root = tmp_path / f"w{w}"
        blobs[w] = {str(f.relative_to(root)): f.read_bytes() for f in sorted(root.rglob("*")) if f.is_file()}
    same = blobs[1] == blobs[4] == blobs[16]
    report_line(11, "determinism", same, f"{len(blobs[1])} output files byte-identical for workers 1, 4, 16"
                if same else "outputs differ across worker counts")
    assert same and {"reps.csv", "summary.json"} <= set(blobs[1])
