from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lfsm_localtime.errors import DivergenceError, DomainError, RefinementNeededError
from lfsm_localtime.function_space import (
    KERNELS,
    FiniteClass,
    RealFunction,
    SmoothBall,
    beta_moment,
    beta_moment_inf,
    beta_norm,
    bracket_cover,
    default_lambda_grid,
    gaussian,
    kernel,
    location_family,
    shifted_diff,
    triangular,
)

GRID = np.linspace(-6, 6, 1001)


def test_triangular_values():
    tri = triangular()
    assert tri(0.5) == 0.5
    assert tri.fhat(0.0) == pytest.approx(1.0)
    assert tri.integral == 1.0


def test_shifted_diff_cancels():
    f = shifted_diff(triangular(), 0, 1)
    assert f.integral == 0.0
    assert f(0.5) == 0.0


@pytest.mark.parametrize("name", ["triangular", "gaussian", "epanechnikov", "indicator"])
def test_fhat_matches_quadrature(name):
    f = kernel(name)
    lo, hi = f.support if f.support is not None else (-12, 12)
    for lam in (0.0, 0.7, 3.1):
        num = integrate.quad(lambda x: f(x) * math.cos(lam * x), lo, hi, limit=200, points=[0])[0]
        assert f.fhat(lam).real == pytest.approx(num, abs=1e-8)
        assert abs(f.fhat(lam)) <= f.l1_norm + 1e-12


def test_registry_complete():
    assert {"triangular", "gaussian", "epanechnikov", "indicator"} <= set(KERNELS)
    d = kernel("shifted_diff", g="triangular", a1=0.0, a2=0.5)
    assert d.integral == 0.0


def test_beta_norm_zero_function():
    assert beta_norm(shifted_diff(triangular(), 0, 0), 0.5).value == 0.0


def test_beta_norm_shift_bound():
    est = beta_norm(shifted_diff(triangular(), 0, 0.25), 0.5)
    assert 0 < est.value <= 2**0.5 * 0.25**0.5 * 1.0
    assert est.refinement_delta < 1e-3


def test_beta_norm_moment_bound():
    f = shifted_diff(triangular(), 0, 1)
    est = beta_norm(f, 0.5).value
    assert est <= 2**0.5 * beta_moment(f, 0.5)
    assert est <= 2**0.5 * beta_moment_inf(f, 0.5) <= 2**0.5 * beta_moment(f, 0.5) + 1e-12


def test_beta_norm_domain():
    with pytest.raises(DomainError):
        beta_norm(triangular(), 1.5)
    with pytest.raises(DomainError):
        beta_norm(triangular(), 0.0)


def test_beta_moment_oracles():
    assert beta_moment(triangular(), 1.0) == pytest.approx(1 / 3, abs=1e-12)
    assert beta_moment(gaussian(), 0.0) == pytest.approx(gaussian().l1_norm)
    # second moment of the standard normal density
    assert beta_moment(gaussian(), 2.0) == pytest.approx(1.0, abs=1e-10)


def test_beta_moment_divergent_tail():
    heavy = RealFunction(func=lambda x: 1.0 / (1.0 + np.asarray(x) ** 2), name="cauchy-like")
    with pytest.raises(DivergenceError):
        beta_moment(heavy, 1.0)


@settings(max_examples=20, deadline=None)
@given(beta=st.sampled_from([0.25, 0.5, 0.75, 1.0]), gap=st.floats(2**-6, 1.0))
def test_lemma_iii_shift_inequality(beta, gap):
    g = triangular()
    est = beta_norm(shifted_diff(g, 0.0, gap), beta).value
    assert est <= 2 ** (1 - beta) * gap**beta * g.l1_norm + 1e-8


def test_lemma_i_grid_envelope():
    for name in ["triangular", "gaussian", "epanechnikov"]:
        f = shifted_diff(kernel(name), 0, 0.5)
        for beta in (0.25, 1.0):
            est = beta_norm(f, beta)
            lam = default_lambda_grid(est.n_points)
            cap = np.minimum(lam**beta * est.value, f.l1_norm) * (1 + 1e-8)
            assert np.all(np.abs(f.fhat(lam)) <= cap + 1e-8)


def test_singleton_cover():
    cls = FiniteClass([triangular()])
    for eps in (0.05, 0.5):
        cover = bracket_cover(cls, eps)
        assert cover.count == 1
        b = cover.brackets[0]
        assert b.contains(triangular(), GRID)
        assert b.width < eps


def test_envelope_cover_for_huge_eps():
    cls = FiniteClass([triangular()])
    cover = bracket_cover(cls, 2 * cls.envelope.l1_norm + 1)
    assert cover.count == 1
    assert np.allclose(cover.brackets[0].upper(GRID), cls.envelope(GRID))


@pytest.mark.parametrize("eps", [2.0, 1.0, 0.5, 0.1, 0.03])
def test_location_family_count_and_membership(eps):
    cls = location_family(triangular())
    cover = bracket_cover(cls, eps)
    assert cover.count <= math.ceil(4 / eps)
    rng = np.random.default_rng(0)
    grid = np.linspace(-2, 3, 1000)
    for theta in rng.uniform(0, 1, 100):
        f = triangular().shift(theta)
        assert np.all(np.abs(f(grid)) <= cls.envelope(grid) + 1e-12)
        b = cover.assign(theta)
        assert b.contains(f, grid)
        assert b.width < eps


def test_location_family_count_monotone():
    cls = location_family(triangular())
    counts = [bracket_cover(cls, e).count for e in (1.0, 0.5, 0.25, 0.1, 0.05)]
    assert counts == sorted(counts)


def test_smooth_ball_brackets_valid():
    env = triangular() * 1.0
    ball = SmoothBall(env, tau=0.5, L=1.0)
    eps = 0.5
    cover = bracket_cover(ball, eps)
    assert cover.count >= 1
    grid = np.linspace(-1.5, 1.5, 1000)
    for f in ball.sample(10, np.random.default_rng(1)):
        assert np.all(np.abs(f(grid)) <= env(grid) + 1e-12)
        b = cover.assign(f)
        assert b.contains(f, grid)
        width = integrate.quad(lambda x: b.upper(x) - b.lower(x), -1.5, 1.5, limit=400)[0]
        assert width < eps


def test_smooth_ball_refinement_needed():
    ball = SmoothBall(triangular(), tau=0.5, L=1.0, min_mesh=1e-2)
    with pytest.raises(RefinementNeededError):
        bracket_cover(ball, 1e-3)


def test_arithmetic_and_transforms():
    tri = triangular()
    f = 2.0 * tri - tri.shift(1.0)
    assert f.integral == pytest.approx(1.0)
    assert f(0.0) == pytest.approx(2.0)
    d = tri.dilate(2.0)
    assert d.integral == pytest.approx(1.0)
    assert d(1.0) == pytest.approx(0.25)
    assert d.fhat(1.3) == pytest.approx(tri.fhat(2.6))


def test_beta_moment_sign_change_on_grid_node():
    # the sign change of this difference sits exactly on a sampling node
    f = shifted_diff(kernel("epanechnikov"), 0, 0.25)
    y, beta = -0.6950900970459386, 0.25

    def g(x):
        k = lambda z: 0.75 * (1 - z * z) if abs(z) < 1 else 0  # noqa: E731
        return abs(k(x - y) - k(x - y - 0.25)) * abs(x) ** beta

    pts = sorted([y - 1, y - 0.75, y + 0.125, 0, y + 1, y + 1.25])
    exact = float(mpmath.quad(g, pts))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        assert beta_moment(f, beta, shift=y) == pytest.approx(exact, rel=1e-10)
