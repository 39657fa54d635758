from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfsm_localtime.errors import DomainError, SpecError
from lfsm_localtime.innovations import InnovationModel, NormingSequence
from lfsm_localtime.linear_process import (
    NormingConstants,
    PathBundle,
    ProcessSpec,
    build_path,
    coefficients,
    norming,
    partial_sums,
    simulate_lfsm,
)


def test_case_a_passthrough():
    spec = ProcessSpec("a", phi=(1, 0.5, 0.25, 0.125))
    assert coefficients(spec, 3).tolist() == [1, 0.5, 0.25, 0.125]
    assert coefficients(spec, 5).tolist() == [1, 0.5, 0.25, 0.125, 0, 0]


def test_case_b_direct_formula():
    spec = ProcessSpec("b", alpha=2.0, H=0.75)
    phi = coefficients(spec, 32)
    assert phi[0] == 1.0
    # k^(H - 1 - 1/alpha) = 16^-0.75 = 0.125
    assert phi[16] == pytest.approx(16**-0.75)
    assert phi[16] == pytest.approx(0.125)


def test_case_c_zero_sum():
    spec = ProcessSpec("c", alpha=2.0, H=0.25)
    phi = coefficients(spec, 10_000)
    assert abs(math.fsum(phi)) <= 1e-12
    assert np.all(phi[1:] < 0)


def test_case_errors():
    with pytest.raises(SpecError):
        ProcessSpec("c", alpha=2.0, H=0.75)
    with pytest.raises(SpecError):
        ProcessSpec("b", alpha=2.0, H=0.25)
    with pytest.raises(SpecError):
        ProcessSpec("a", phi=(1.0, -1.0))


def test_norming_examples():
    rho = NormingSequence()
    assert norming(ProcessSpec("a"), rho, 100) == pytest.approx((1, 10, 10))
    c, d, e = norming(ProcessSpec("b", alpha=2.0, H=0.75), rho, 16)
    assert (c, d, e) == pytest.approx((8, 32, 0.5))
    assert norming(ProcessSpec("a", phi=[2.0**-k for k in range(60)]), rho, 25) == pytest.approx((2, 10, 2.5))
    with pytest.raises(DomainError):
        NormingConstants(ProcessSpec("a"), rho).d(0)


@pytest.mark.parametrize("case, H", [("a", 0.5), ("b", 0.75), ("c", 0.25)])
def test_regular_variation_indices(case, H):
    spec = ProcessSpec(case, alpha=2.0, H=None if case == "a" else H)
    nc = NormingConstants(spec, NormingSequence())
    k = 2.0 ** np.arange(6, 16)
    slope = lambda f: np.polyfit(np.log(k), np.log(f(k)), 1)[0]  # noqa: E731
    assert slope(nc.c) == pytest.approx(H - 0.5, abs=1e-6)
    assert slope(nc.d) == pytest.approx(H, abs=1e-6)
    assert slope(nc.e) == pytest.approx(1 - H, abs=1e-6)
    assert nc.c(0) == 1.0


def test_random_walk_by_hand():
    p = build_path(ProcessSpec("a"), [0.0, 1, -1, 2], K=1)
    assert p.x.tolist() == [1, 0, 2]


def test_two_tap_filter_by_hand():
    p = build_path(ProcessSpec("a", phi=(1, 0.5)), [0.0, 1, 1, 1], K=1)
    assert p.v.tolist() == [1, 1.5, 1.5]
    assert p.x.tolist() == [1, 2.5, 4]


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_fft_equals_direct(seed):
    spec = ProcessSpec("b", alpha=2.0, H=0.75)
    eps = np.random.default_rng(seed).standard_normal(4096 + 512)
    a = build_path(spec, eps, K=512, method="fft")
    b = build_path(spec, eps, K=512, method="direct")
    assert np.max(np.abs(a.x - b.x)) <= 1e-10 * np.max(np.abs(b.x))


def test_partial_sums_deterministic_and_invariants():
    spec, m = ProcessSpec("b", alpha=1.5, H=0.8), InnovationModel(1.5, family="exact-stable")
    p1 = partial_sums(spec, m, 300, seed=9)
    p2 = partial_sums(spec, m, 300, seed=9)
    assert np.array_equal(p1.x, p2.x)
    assert p1.eps.size == 300 + p1.K
    assert np.allclose(np.cumsum(p1.v), p1.x)


def test_prefix_renorms(tmp_path):
    p = partial_sums(ProcessSpec("a"), InnovationModel(), 400, seed=1)
    q = p.prefix(100)
    assert q.n == 100 and q.d_n == pytest.approx(10) and np.array_equal(q.x, p.x[:100])
    p.to_csv(tmp_path / "path.csv")
    rows = (tmp_path / "path.csv").read_text().splitlines()
    assert rows[0] == "t,eps,v,x" and len(rows) == 401


def test_from_path():
    p = PathBundle.from_path([0, 1, -1], 1.0, 1.0)
    assert p.n == 3 and p.v.tolist() == [0, 1, -2]


def test_lfsm_starts_at_zero():
    x = simulate_lfsm(0.7, 1.6, 32, 5.0, 4, seed=3)
    assert x.shape == (33,) and x[0] == 0.0


def test_lfsm_variance_and_slope():
    m = 64
    brown = np.array([simulate_lfsm(0.5, 2.0, m, 5.0, 4, seed=s)[-1] for s in range(2000)])
    assert abs(brown.var(ddof=1) / 2 - 1) < 0.08
    paths = np.array([simulate_lfsm(0.75, 2.0, m, 20.0, 8, seed=10_000 + s) for s in range(1500)])
    r = np.array([4, 8, 16, 32, 64])
    slope = np.polyfit(np.log(r / m), np.log(paths[:, r].var(axis=0, ddof=1)), 1)[0]
    assert abs(slope - 1.5) < 0.1
