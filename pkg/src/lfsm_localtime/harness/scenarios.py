"""Scenario definitions: one replication step plus an aggregation step each.

Every ``summarize`` works from the per-replication output dicts alone, so
verdicts can be recomputed from ``reps.csv``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import stats
from scipy.stats import qmc

from ..function_space import (
    beta_moment_inf,
    beta_norm,
    default_lambda_grid,
    kernel,
    shifted_diff,
    triangular,
)
from ..innovations import calibrate_norming
from ..linear_process import NormingConstants, build_path, partial_sums, simulate_lfsm
from ..local_time import (
    beta_bar,
    default_a_grid,
    increment_moments,
    kernel_sums,
    local_time_field,
    support_set,
)
from ..regression import (
    RegressionSample,
    bandwidth_check,
    nadaraya_watson,
    realize_bandwidth,
    uniform_error,
)
from ..zero_energy import delta_n, martingale_decomposition, quadratic_variation

__all__ = ["SCENARIOS", "Scenario", "M0_FUNCTIONS"]

_GAUSS_RW = {"model": {"family": "gaussian", "alpha": 2.0}, "spec": {"case": "a", "phi": [1.0]}}

M0_FUNCTIONS = {
    "rational": lambda x: x / (1.0 + x * x),
    "sin": np.sin,
    "tanh": np.tanh,
}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    replicate: Callable
    summarize: Callable
    check: Callable = field(default=lambda cfg: [])


def _verdict(ok, value, threshold, detail=""):
    return {"pass": bool(ok), "value": value, "threshold": threshold, "detail": detail}


def _rng(seed: np.random.SeedSequence, stream: int = 0) -> np.random.Generator:
    # child keyed by stream number; unlike ``spawn`` this does not depend on call order
    child = np.random.SeedSequence(seed.entropy, spawn_key=(*seed.spawn_key, stream))
    return np.random.default_rng(child)


def _path(cfg, n, seed, stream=0):
    return partial_sums(cfg.process_spec(), cfg.innovation_model(), n, seed=_rng(seed, stream))


def _col(records, key):
    return np.array([rec[key] for rec in records], dtype=float)


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -- mass identity ----------------------------------------------------------------

def _mass_rep(cfg, r, seed):
    p = cfg.params
    f = kernel(p["kernel"])
    h = float(p["h"])
    out = {}
    for i, n in enumerate(cfg.n_ladder):
        path = _path(cfg, n, seed, i)
        lo, hi = f.support
        mesh = h / (path.d_n * p["points_per_h"])
        a0 = (path.x.min() + h * lo) / path.d_n - mesh
        a1 = (path.x.max() + h * hi) / path.d_n + mesh
        grid = np.linspace(a0, a1, int(math.ceil((a1 - a0) / mesh)) + 1)
        fld = local_time_field(path, f, h, grid)
        out[f"closed_residual_{n}"] = abs(fld.closed_form_mass() - 1.0)
        out[f"grid_residual_{n}"] = abs(fld.grid_mass() - 1.0)
    return out


def _mass_sum(cfg, records):
    p = cfg.params
    closed = max(max(r[f"closed_residual_{n}"] for n in cfg.n_ladder) for r in records)
    grid = max(max(r[f"grid_residual_{n}"] for n in cfg.n_ladder) for r in records)
    summary = {"max_closed_residual": closed, "max_grid_residual": grid}
    verdicts = {
        "closed_form_mass": _verdict(closed <= p["closed_tol"], closed, p["closed_tol"]),
        "grid_mass": _verdict(grid <= p["grid_tol"], grid, p["grid_tol"]),
    }
    return summary, verdicts, {}


def _mass_check(cfg):
    f = kernel(cfg.params.get("kernel", "triangular"))
    out = []
    if f.support is None:
        out.append("mass_identity needs a compactly supported kernel")
    if not cfg.params.get("h", 1.0) > 0:
        out.append("params.h must be > 0")
    return out


# -- Brownian local-time law -----------------------------------------------------------

def _law_rep(cfg, r, seed):
    p = cfg.params
    path = _path(cfg, cfg.n_ladder[0], seed)
    fld = local_time_field(path, p["kernel"], p["h"], [p["a"]])
    return {"L0": float(fld.values[0])}


def _law_sum(cfg, records):
    p = cfg.params
    L = _col(records, "L0")
    target = 1.0 / math.sqrt(math.pi)
    mean = float(np.mean(L))
    rel = abs(mean - target) / target
    # |N(0,1)| / sqrt(2) is half-normal with scale 1/sqrt(2)
    law = stats.halfnorm(scale=1.0 / math.sqrt(2.0))
    ks = stats.kstest(L, law.cdf)
    summary = {"mean": mean, "target": target, "relative_error": rel, "sd": float(np.std(L, ddof=1)),
               "ks_statistic": float(ks.statistic), "ks_pvalue": float(ks.pvalue), "R": L.size}
    qs = np.linspace(0.01, 0.99, 99)
    plots = {"local_time_quantiles": {
        "columns": ["q", "empirical", "half_normal"],
        "rows": [[q, float(np.quantile(L, q)), float(law.ppf(q))] for q in qs],
        "meta": {"x": "q", "y": ["empirical", "half_normal"]},
    }}
    verdicts = {
        "mean_within_tol": _verdict(rel <= p["mean_tol"], rel, p["mean_tol"], f"mean {mean:.4f} vs {target:.4f}"),
        "ks_not_rejected": _verdict(ks.pvalue >= p["ks_level"], float(ks.pvalue), p["ks_level"]),
    }
    return summary, verdicts, plots


# -- Hoelder increments --------------------------------------------------------------

def _holder_rep(cfg, r, seed):
    p = cfg.params
    path = _path(cfg, cfg.n_ladder[0], seed)
    a = p["a"]
    grid = [a] + [a + d for d in p["deltas"]]
    vals = local_time_field(path, "triangular", p["h"], grid).values
    out = {"L_a": float(vals[0])}
    for i, d in enumerate(p["deltas"]):
        out[f"L_shift_{i}"] = float(vals[i + 1])
    return out


def _holder_sum(cfg, records):
    p = cfg.params
    base = _col(records, "L_a")
    shifted = np.column_stack([_col(records, f"L_shift_{i}") for i in range(len(p["deltas"]))])
    rep = increment_moments(base, shifted, p["deltas"], p["p"], min_reps=p["min_reps"])
    summary = {"slope": rep.slope, "deltas": list(p["deltas"]), "root_moments": rep.root_moments.tolist(),
               "beta_target": p["beta_target"], "beta_bar": beta_bar(cfg.process_spec().H)}
    plots = {"holder_increments": {
        "columns": ["delta", "root_moment"],
        "rows": [[d, m] for d, m in zip(p["deltas"], rep.root_moments.tolist())],
        "meta": {"x": "delta", "y": ["root_moment"], "scale": "loglog"},
    }}
    verdicts = {"slope": _verdict(rep.slope >= p["min_slope"], rep.slope, p["min_slope"])}
    return summary, verdicts, plots


def _holder_check(cfg):
    out = []
    try:
        H = cfg.process_spec().H
        if not cfg.params["beta_target"] < beta_bar(H):
            out.append(f"beta_target must be < beta_bar(H) = {beta_bar(H):g}")
    except Exception:  # spec problems are reported separately
        pass
    if len(cfg.params.get("deltas", [])) < 2:
        out.append("params.deltas needs >= 2 gaps")
    if cfg.replications < cfg.params.get("min_reps", 200):
        out.append(f"replications must be >= {cfg.params.get('min_reps', 200)} for increment moments")
    return out


# -- zero-energy scaling ---------------------------------------------------------------

def _lattice(p):
    g = triangular()
    a1, a2 = p["g_shift"]
    step, size = p["lattice_step"], p["lattice_size"]
    thetas = step * (np.arange(size) - size // 2)
    return g, a1, a2, thetas


def _zero_rep(cfg, r, seed):
    p = cfg.params
    g, a1, a2, thetas = _lattice(p)
    gdiff = shifted_diff(g, a1, a2)
    path = _path(cfg, cfg.n_ladder[-1], seed)
    out = {}
    for n in cfg.n_ladder:
        x = path.x[:n]
        out[f"S_{n}"] = math.fsum(gdiff(x))
        xs = np.sort(x)
        centers = np.concatenate([thetas + a1, thetas + a2])
        ks = kernel_sums(xs, centers, g, 1.0)
        out[f"lattice_max_{n}"] = float(np.max(np.abs(ks[: thetas.size] - ks[thetas.size:])))
    return out


@lru_cache(maxsize=None)
def _lattice_delta(beta, p_key, spec_key, model_key, n):
    import json

    from .config import ExperimentConfig

    p = json.loads(p_key)
    cfg = ExperimentConfig("zero_energy_scaling", json.loads(model_key), json.loads(spec_key))
    g, a1, a2, thetas = _lattice(p)
    members = [shifted_diff(g, a1 + t, a2 + t) for t in thetas]
    return delta_n(beta, members, n, cfg.process_spec(), calibrate_norming(cfg.innovation_model()))


def _zero_sum(cfg, records):
    import json

    p = cfg.params
    spec = cfg.process_spec()
    rho = calibrate_norming(cfg.innovation_model())
    nc = NormingConstants(spec, rho)
    ns = np.array(cfg.n_ladder)
    e = np.array([nc.e(int(n)) for n in ns])
    var = np.array([float(np.var(_col(records, f"S_{n}"), ddof=1)) for n in ns])
    slope = _slope(e, var)
    keys = (json.dumps(p, sort_keys=True), json.dumps(cfg.spec, sort_keys=True),
            json.dumps(cfg.model, sort_keys=True))
    env_ok = True
    worst = 0.0
    bounds = {}
    for n in ns:
        rep = _lattice_delta(p["beta"], *keys, int(n))
        bound = p["envelope_factor"] * rep.value * math.log(n)
        bounds[int(n)] = bound
        m = _col(records, f"lattice_max_{n}")
        worst = max(worst, float(np.max(m)) / bound)
        env_ok &= bool(np.all(m <= bound))
    lo, hi = p["slope_range"]
    summary = {"slope": slope, "variances": var.tolist(), "e_n": e.tolist(),
               "envelope_bounds": bounds, "worst_envelope_ratio": worst}
    plots = {"zero_energy_variance": {
        "columns": ["n", "e_n", "var_S"],
        "rows": [[int(n), float(en), float(v)] for n, en, v in zip(ns, e, var)],
        "meta": {"x": "e_n", "y": ["var_S"], "scale": "loglog"},
    }}
    verdicts = {
        "variance_slope": _verdict(lo <= slope <= hi, slope, [lo, hi]),
        "lattice_envelope": _verdict(env_ok, worst, 1.0, "max |S_n f| / (factor delta_n log n)"),
    }
    return summary, verdicts, plots


def _zero_check(cfg):
    out = []
    if len(cfg.n_ladder) < 3:
        out.append("zero_energy_scaling needs >= 3 ladder points")
    if cfg.replications < 2:
        out.append("zero_energy_scaling needs >= 2 replications for variances")
    try:
        H = cfg.process_spec().H
        if not 0 < cfg.params["beta"] < beta_bar(H):
            out.append(f"params.beta must lie in (0, {beta_bar(H):g})")
    except Exception:
        pass
    return out


# -- martingale decomposition ------------------------------------------------------------

@lru_cache(maxsize=8)
def _lhs_points(master_seed: int, dim: int, R: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(2**32 - 1,)))
    return qmc.LatinHypercube(d=dim, seed=rng).random(R)


def _decomp_path(cfg, r, seed):
    n = cfg.n_ladder[0]
    spec = cfg.process_spec()
    model = cfg.innovation_model()
    if cfg.params["sampling"] == "iid":
        return partial_sums(spec, model, n, seed=_rng(seed))
    K = spec.default_K(n)
    u = _lhs_points(cfg.master_seed, n + K, cfg.replications)[r]
    if model.family == "gaussian":
        eps = model.scale_cal * stats.norm.ppf(u)
    else:
        eps = model.scale_cal * stats.t.ppf(u, model.df)
    return build_path(spec, eps, calibrate_norming(model), K)


def _decomp_rep(cfg, r, seed):
    p = cfg.params
    path = _decomp_path(cfg, r, seed)
    f = kernel(p["kernel"])
    dec = martingale_decomposition(path, f, cfg.innovation_model(), n_max=p["n_max"], tol=p["tol"])
    out = {"S": dec.S, "N": dec.N, "residual": dec.residual, "quadrature_tol": dec.quadrature_tol}
    if p["quadratic_variation"]:
        U, V = quadratic_variation(dec)
        for k in range(dec.n):
            out[f"U_{k}"] = float(U[k])
            out[f"V_{k}"] = float(V[k])
    return out


def _decomp_sum(cfg, records):
    p = cfg.params
    S = _col(records, "S")
    res = np.abs(_col(records, "residual"))
    bound = p["residual_factor"] * (1 + np.abs(S))
    summary = {"max_abs_residual": float(res.max()), "max_residual_ratio": float(np.max(res / bound)),
               "max_quadrature_tol": float(np.max(_col(records, "quadrature_tol")))}
    verdicts = {"reconstruction": _verdict(bool(np.all(res <= bound)), float(np.max(res / bound)), 1.0,
                                           "max |S - N - sum M| / (factor (1 + |S|))")}
    plots = {}
    if p["quadratic_variation"]:
        n = cfg.n_ladder[0]
        mu = np.array([float(np.mean(_col(records, f"U_{k}"))) for k in range(n)])
        mv = np.array([float(np.mean(_col(records, f"V_{k}"))) for k in range(n)])
        gap = np.abs(mu - mv) / mv
        summary.update({"mean_U": mu.tolist(), "mean_V": mv.tolist(), "relative_gap": gap.tolist()})
        verdicts["tower_property"] = _verdict(bool(np.all(gap <= p["tower_tol"])), float(gap.max()),
                                              p["tower_tol"], "max_k |mean U - mean V| / mean V")
        plots["tower_property"] = {
            "columns": ["k", "mean_U", "mean_V"],
            "rows": [[k, float(a), float(b)] for k, (a, b) in enumerate(zip(mu, mv))],
            "meta": {"x": "k", "y": ["mean_U", "mean_V"]},
        }
    return summary, verdicts, plots


def _decomp_check(cfg):
    p = cfg.params
    out = []
    if len(cfg.n_ladder) != 1:
        out.append("decomposition_identity takes a single n")
    elif cfg.n_ladder[0] > p.get("n_max", 64):
        out.append(f"n = {cfg.n_ladder[0]} exceeds params.n_max = {p.get('n_max', 64)}")
    fam = cfg.model.get("family", "gaussian")
    if fam not in ("gaussian", "exact-stable", "student-t"):
        out.append(f"decomposition needs gaussian, exact-stable or student-t innovations, not {fam}")
    if p.get("sampling") not in ("iid", "lhs"):
        out.append("params.sampling must be 'iid' or 'lhs'")
    elif p["sampling"] == "lhs" and fam == "exact-stable":
        out.append("lhs sampling needs an innovation quantile function (gaussian or student-t)")
    return out


# -- norm inequalities -----------------------------------------------------------------

def _library(p):
    out = []
    for name in p["kernels"]:
        if name == "indicator":
            out.append(kernel("indicator", lo=-0.5, hi=0.5))
        else:
            out.append(kernel(name))
    return out


def _norm_rep(cfg, r, seed):
    p = cfg.params
    tol = p["tol"]
    counts = {"lemma_i": 0, "lemma_ii": 0, "lemma_iii": 0}
    checks = {"lemma_i": 0, "lemma_ii": 0, "lemma_iii": 0}
    worst = {"lemma_i": -math.inf, "lemma_ii": -math.inf, "lemma_iii": -math.inf}
    out = {}
    for g in _library(p):
        diffs = [(gap, shifted_diff(g, 0.0, gap)) for gap in p["gaps"]]
        for beta in p["betas"]:
            for f in [g] + [d for _, d in diffs]:
                est = beta_norm(f, beta)
                lam = default_lambda_grid(est.n_points)
                fh = np.abs(f.fhat(lam))
                cap = np.minimum(lam**beta * est.value * (1 + tol), f.l1_norm * (1 + tol))
                excess = float(np.max(fh - cap))
                checks["lemma_i"] += 1
                counts["lemma_i"] += excess > tol
                worst["lemma_i"] = max(worst["lemma_i"], excess)
            for gap, f in diffs:
                est = beta_norm(f, beta).value
                bound_ii = 2 ** (1 - beta) * beta_moment_inf(f, beta)
                checks["lemma_ii"] += 1
                counts["lemma_ii"] += est - bound_ii > tol
                worst["lemma_ii"] = max(worst["lemma_ii"], est - bound_ii)
                bound_iii = 2 ** (1 - beta) * gap**beta * g.l1_norm
                checks["lemma_iii"] += 1
                counts["lemma_iii"] += est - bound_iii > tol
                worst["lemma_iii"] = max(worst["lemma_iii"], est - bound_iii)
                out[f"ratio_iii_{g.name}_{beta:g}_{gap:g}"] = est / bound_iii
    for k in counts:
        out[f"violations_{k}"] = counts[k]
        out[f"checks_{k}"] = checks[k]
        out[f"worst_excess_{k}"] = worst[k]
    return out


def _norm_sum(cfg, records):
    summary, verdicts = {}, {}
    for k in ("lemma_i", "lemma_ii", "lemma_iii"):
        v = int(sum(rec[f"violations_{k}"] for rec in records))
        summary[f"violations_{k}"] = v
        summary[f"checks_{k}"] = int(records[0][f"checks_{k}"])
        summary[f"worst_excess_{k}"] = max(rec[f"worst_excess_{k}"] for rec in records)
        verdicts[k] = _verdict(v == 0, v, 0, f"{summary[f'checks_{k}']} checks")
    rows = []
    for key in sorted(records[0]):
        if key.startswith("ratio_iii_"):
            _, _, name, beta, gap = key.split("_", 4)
            rows.append([name, float(beta), float(gap), records[0][key]])
    plots = {"shift_bound_ratio": {"columns": ["kernel", "beta", "gap", "ratio"], "rows": rows,
                                   "meta": {"x": "gap", "y": ["ratio"], "group": ["kernel", "beta"]}}}
    return summary, verdicts, plots


def _norm_check(cfg):
    out = []
    bad = [b for b in cfg.params.get("betas", []) if not 0 < b <= 1]
    if bad:
        out.append(f"params.betas must lie in (0, 1], got {bad}")
    return out


# -- support coverage ------------------------------------------------------------------

def _coverage_rep(cfg, r, seed):
    p = cfg.params
    path = _path(cfg, cfg.n_ladder[0], seed)
    h = realize_bandwidth(p["bandwidth"], path.x, p["gamma"])
    a = default_a_grid(p["grid_M"], p["mesh"])
    fld = local_time_field(path, p["kernel"], h, a)
    fit = nadaraya_watson(RegressionSample(path.x, np.zeros(path.n), lambda x: 0 * x),
                          p["kernel"], h, path.d_n * a)
    out = {"h": h}
    for i, eps in enumerate(p["eps_ladder"]):
        sup = support_set(fld, path, eps)
        mask = sup.contains(fit.x_grid) & fit.defined
        out[f"coverage_{i}"] = sup.coverage
        out[f"infden_ratio_{i}"] = float(np.min(fit.denominator[mask]) / path.e_n) if mask.any() else math.nan
    return out


def _coverage_sum(cfg, records):
    p = cfg.params
    rows = []
    good = []
    for i, eps in enumerate(p["eps_ladder"]):
        cov = float(np.mean(_col(records, f"coverage_{i}")))
        ratio = _col(records, f"infden_ratio_{i}")
        share = float(np.mean(ratio >= p["floor_frac"] * eps))
        rows.append([eps, cov, share])
        if cov <= p["coverage_max"] and share >= p["floor_share"]:
            good.append(eps)
    summary = {"per_epsilon": rows, "passing_epsilons": good}
    verdicts = {"coverage_and_floor": _verdict(bool(good), good[0] if good else None, p["coverage_max"],
                                               "smallest passing epsilon")}
    plots = {"support_coverage": {"columns": ["epsilon", "mean_coverage", "floor_share"], "rows": rows,
                                  "meta": {"x": "epsilon", "y": ["mean_coverage", "floor_share"]}}}
    return summary, verdicts, plots


# -- regression ------------------------------------------------------------------------

def _regression_rep(cfg, r, seed):
    p = cfg.params
    m0 = M0_FUNCTIONS[p["m0"]]
    full = _path(cfg, cfg.n_ladder[-1], seed, 0)
    noise = p["sigma_u"] * _rng(seed, 1).standard_normal(full.n)
    a = default_a_grid(p["grid_M"], p["mesh"])
    out = {}
    for n in cfg.n_ladder:
        path = full.prefix(n) if n < full.n else full
        h = realize_bandwidth(p["bandwidth"], path.x, p["gamma"])
        fld = local_time_field(path, p["kernel"], h, a)
        sup = support_set(fld, path, p["epsilon"])
        grid = path.d_n * a
        fit = nadaraya_watson(RegressionSample(path.x, m0(path.x) + noise[:n], m0, p["sigma_u"]),
                              p["kernel"], h, grid)
        ue = uniform_error(fit, m0, sup)
        c = p["constant"]
        const_fit = nadaraya_watson(RegressionSample(path.x, np.full(n, c), lambda x: c + 0 * x),
                                    p["kernel"], h, grid)
        d = const_fit.defined
        out[f"h_{n}"] = h
        out[f"sup_error_{n}"] = ue.sup_error
        out[f"infden_ratio_{n}"] = ue.inf_denominator / path.e_n
        out[f"const_error_{n}"] = float(np.max(np.abs(const_fit.m_hat[d] - c))) if d.any() else 0.0
    return out


def _regression_sum(cfg, records):
    p = cfg.params
    ns = cfg.n_ladder
    errs = np.column_stack([_col(records, f"sup_error_{n}") for n in ns])
    decreasing = np.all(np.diff(errs, axis=1) < 0, axis=1)
    share = float(np.mean(decreasing))
    const = max(max(rec[f"const_error_{n}"] for n in ns) for rec in records)
    h_med = [float(np.median(_col(records, f"h_{n}"))) for n in ns]
    bw = bandwidth_check(h_med, ns, cfg.process_spec(), calibrate_norming(cfg.innovation_model()))
    summary = {"decreasing_share": share, "max_constant_error": const,
               "median_sup_error": np.median(errs, axis=0).tolist(), "median_h": h_med,
               "bandwidth_exponent": bw.slope, "bandwidth_window": list(bw.window),
               "bandwidth_admissible": bw.admissible}
    plots = {"regression_sup_error": {
        "columns": ["n", "median_sup_error", "median_h"],
        "rows": [[n, float(e), h] for n, e, h in zip(ns, np.median(errs, axis=0), h_med)],
        "meta": {"x": "n", "y": ["median_sup_error"]},
    }}
    verdicts = {
        "constant_exact": _verdict(const <= p["const_tol"], const, p["const_tol"]),
        "sup_error_decreasing": _verdict(share >= p["decrease_share"], share, p["decrease_share"]),
    }
    return summary, verdicts, plots


def _regression_check(cfg):
    p = cfg.params
    out = []
    if p.get("m0") not in M0_FUNCTIONS:
        out.append(f"params.m0 must be one of {sorted(M0_FUNCTIONS)}")
    if len(cfg.n_ladder) < 3:
        out.append("regression_uniform needs >= 3 ladder points")
    if isinstance(p.get("bandwidth"), (int, float)) and not p["bandwidth"] > 0:
        out.append("params.bandwidth must be > 0")
    return out


# -- LFSM sanity -------------------------------------------------------------------------

def _lfsm_rep(cfg, r, seed):
    p = cfg.params
    a = cfg.model.get("alpha", 2.0)
    x1 = simulate_lfsm(p["H_var"], a, p["m"], p["T"], p["M"], seed=_rng(seed, 0))
    x2 = simulate_lfsm(p["H_slope"], a, p["m"], p["T"], p["M"], seed=_rng(seed, 1))
    out = {"X1": float(x1[-1])}
    for i, rr in enumerate(p["r_ladder"]):
        out[f"Xr_{i}"] = float(x2[int(round(rr * p["m"]))])
    return out


def _lfsm_sum(cfg, records):
    p = cfg.params
    x1 = _col(records, "X1")
    var1 = float(np.var(x1, ddof=1))
    rel = abs(var1 - p["var_target"]) / p["var_target"]
    rs = np.array(p["r_ladder"])
    vr = np.array([float(np.var(_col(records, f"Xr_{i}"), ddof=1)) for i in range(rs.size)])
    slope = _slope(rs, vr)
    target = 2 * p["H_slope"]
    summary = {"var_X1": var1, "relative_error": rel, "slope": slope, "slope_target": target,
               "var_Xr": vr.tolist()}
    plots = {"lfsm_variance": {"columns": ["r", "var_X"], "rows": [[float(a), float(b)] for a, b in zip(rs, vr)],
                               "meta": {"x": "r", "y": ["var_X"], "scale": "loglog"}}}
    verdicts = {
        "variance_at_one": _verdict(rel <= p["var_tol"], rel, p["var_tol"], f"Var X(1) = {var1:.4f}"),
        "variance_slope": _verdict(abs(slope - target) <= p["slope_tol"], slope, [target - p["slope_tol"],
                                                                                  target + p["slope_tol"]]),
    }
    return summary, verdicts, plots


def _lfsm_check(cfg):
    p = cfg.params
    out = []
    for key in ("H_var", "H_slope"):
        if not 0 < p.get(key, 0.5) < 1:
            out.append(f"params.{key} must lie in (0, 1)")
    m = p.get("m", 64)
    for rr in p.get("r_ladder", []):
        if not (0 < rr <= 1) or abs(rr * m - round(rr * m)) > 1e-9:
            out.append(f"r_ladder value {rr} must be a positive multiple of 1/m in (0, 1]")
    return out


_DELTAS = [2.0**-k for k in range(5, 0, -1)]

SCENARIOS = {
    "mass_identity": Scenario(
        "mass_identity", "Total mass of the triangular-kernel local time equals 1.",
        {**_GAUSS_RW, "n_ladder": [1000, 10000], "replications": 1,
         "params": {"kernel": "triangular", "h": 1.0, "points_per_h": 32, "closed_tol": 1e-12, "grid_tol": 1e-3}},
        _mass_rep, _mass_sum, _mass_check,
    ),
    "local_time_law": Scenario(
        "local_time_law", "L_n(0) of a Gaussian random walk against |N(0,1)|/sqrt(2).",
        {**_GAUSS_RW, "n_ladder": [20000], "replications": 1000,
         "params": {"kernel": "triangular", "h": 1.0, "a": 0.0, "mean_tol": 0.05, "ks_level": 0.01}},
        _law_rep, _law_sum,
    ),
    "holder_increments": Scenario(
        "holder_increments", "Spatial increment moments of L_n against the gap.",
        {**_GAUSS_RW, "n_ladder": [2**14], "replications": 500,
         "params": {"a": 0.0, "h": 1.0, "deltas": _DELTAS, "p": 2, "min_slope": 0.3,
                    "beta_target": 0.4, "min_reps": 200}},
        _holder_rep, _holder_sum, _holder_check,
    ),
    "zero_energy_scaling": Scenario(
        "zero_energy_scaling", "Variance growth of zero-energy sums and the class envelope.",
        {**_GAUSS_RW, "n_ladder": [2**k for k in range(10, 17)], "replications": 500,
         "params": {"g_shift": [0.0, 1.0], "lattice_size": 64, "lattice_step": 0.25, "beta": 0.4,
                    "envelope_factor": 10.0, "slope_range": [0.8, 1.2]}},
        _zero_rep, _zero_sum, _zero_check,
    ),
    "decomposition_identity": Scenario(
        "decomposition_identity", "Telescoping martingale decomposition and its quadratic variations.",
        {**_GAUSS_RW, "n_ladder": [32], "replications": 100,
         "params": {"kernel": "gaussian", "quadratic_variation": False, "sampling": "iid", "n_max": 64,
                    "tol": 1e-10, "residual_factor": 1e-6, "tower_tol": 0.05}},
        _decomp_rep, _decomp_sum, _decomp_check,
    ),
    "norm_inequalities": Scenario(
        "norm_inequalities", "Fourier-norm inequalities on library kernels.",
        {**_GAUSS_RW, "n_ladder": [], "replications": 1,
         "params": {"kernels": ["triangular", "gaussian", "epanechnikov", "indicator"],
                    "betas": [0.25, 0.5, 0.75, 1.0], "gaps": [2.0**-k for k in range(6, -1, -1)],
                    "tol": 1e-8}},
        _norm_rep, _norm_sum, _norm_check,
    ),
    "support_coverage": Scenario(
        "support_coverage", "Share of the path outside the estimated support set.",
        {**_GAUSS_RW, "n_ladder": [2**16], "replications": 200,
         "params": {"eps_ladder": [0.05, 0.1, 0.2], "kernel": "triangular", "bandwidth": "iqr",
                    "gamma": 0.2, "grid_M": 3.0, "mesh": 2.0**-7, "coverage_max": 0.05,
                    "floor_frac": 0.95, "floor_share": 0.95}},
        _coverage_rep, _coverage_sum,
    ),
    "regression_uniform": Scenario(
        "regression_uniform", "Nadaraya-Watson sup error on the support set across n.",
        {**_GAUSS_RW, "n_ladder": [2**12, 2**14, 2**16], "replications": 200,
         "params": {"m0": "rational", "sigma_u": 0.2, "kernel": "triangular", "bandwidth": "increment",
                    "gamma": 0.0, "epsilon": 0.1, "grid_M": 3.0, "mesh": 2.0**-7, "constant": 1.7,
                    "const_tol": 1e-12, "decrease_share": 0.8}},
        _regression_rep, _regression_sum, _regression_check,
    ),
    "lfsm_sanity": Scenario(
        "lfsm_sanity", "Variance checks of the simulated stable motion.",
        {**_GAUSS_RW, "n_ladder": [], "replications": 2000,
         "params": {"H_var": 0.5, "H_slope": 0.75, "m": 64, "M": 8, "T": 20.0,
                    "r_ladder": [0.0625, 0.125, 0.25, 0.5, 1.0], "var_target": 2.0,
                    "var_tol": 0.05, "slope_tol": 0.1}},
        _lfsm_rep, _lfsm_sum, _lfsm_check,
    ),
}
