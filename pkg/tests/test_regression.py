from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfsm_localtime.errors import ConfigurationError, DomainError, EmptySupportError, StatisticalPowerError
from lfsm_localtime.function_space import triangular
from lfsm_localtime.innovations import InnovationModel
from lfsm_localtime.linear_process import ProcessSpec, partial_sums
from lfsm_localtime.local_time import local_time_field, support_set
from lfsm_localtime.regression import (
    NadarayaWatson,
    RegressionSample,
    bandwidth_check,
    make_sample,
    nadaraya_watson,
    realize_bandwidth,
    uniform_error,
)

RW = ProcessSpec("a")
GAUSS = InnovationModel()


def _path(n=2000, seed=3):
    return partial_sums(RW, GAUSS, n, seed=seed)


def test_constant_regression_is_exact():
    p = _path()
    s = make_sample(p, lambda x: np.full_like(x, 2.5), sigma_u=0.0, seed=1)
    fit = nadaraya_watson(s, h=1.0)
    assert np.all(fit.defined)
    assert np.max(np.abs(fit.m_hat - 2.5)) <= 1e-12


def test_single_observation():
    s = RegressionSample(np.array([0.3]), np.array([4.0]), lambda x: x)
    fit = nadaraya_watson(s, h=1.0, x_grid=[0.3, 0.8, 2.0])
    assert fit.m_hat[0] == 4.0 and fit.m_hat[1] == 4.0
    assert math.isnan(fit.m_hat[2]) and fit.denominator[2] == 0.0


def test_kernel_rescale_invariance():
    p = _path(800, 4)
    s = make_sample(p, np.sin, seed=2)
    base = nadaraya_watson(s, "triangular", 1.3)
    scaled = nadaraya_watson(s, 3.0 * triangular(), 1.3, check_kernel=False)
    ok = base.defined
    assert np.allclose(base.m_hat[ok], scaled.m_hat[ok], rtol=0, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), h=st.floats(0.2, 5.0))
def test_convex_combination(seed, h):
    p = _path(300, seed)
    s = make_sample(p, np.cos, seed=seed)
    fit = nadaraya_watson(s, h=h)
    ok = fit.defined
    assert np.all(fit.m_hat[ok] >= s.y.min() - 1e-12)
    assert np.all(fit.m_hat[ok] <= s.y.max() + 1e-12)


def test_denominator_is_scaled_local_time():
    p = _path(5000, 6)
    s = make_sample(p, np.sin, seed=1)
    grid = np.linspace(p.x.min(), p.x.max(), 101)
    fit = nadaraya_watson(s, h=0.9, x_grid=grid)
    fld = local_time_field(p, "triangular", 0.9, grid / p.d_n)
    assert np.allclose(fit.denominator, p.e_n * fld.values, rtol=1e-12, atol=1e-12)


def test_bandwidth_rules():
    p = _path(1000, 1)
    assert realize_bandwidth(0.7, p.x) == 0.7
    q75, q25 = np.percentile(p.x, [75, 25])
    assert realize_bandwidth("iqr", p.x, 0.2) == pytest.approx((q75 - q25) * 1000**-0.2)
    assert realize_bandwidth("increment", p.x, 0.0) == pytest.approx(np.std(np.diff(p.x, prepend=0.0)))
    with pytest.raises(ConfigurationError):
        realize_bandwidth("silverman", p.x)
    with pytest.raises(DomainError):
        realize_bandwidth(0.0, p.x)


def test_bandwidth_check():
    # log^3 n / sqrt n only decreases past n = e^6
    n = np.array([2**k for k in range(10, 18)])
    assert bandwidth_check(n**0.2, n, RW).admissible
    assert bandwidth_check(1 / np.log(n), n, RW).admissible
    bad = bandwidth_check(n.astype(float), n, RW)
    assert not bad.admissible and bad.slope == pytest.approx(1.0)
    with pytest.raises(StatisticalPowerError):
        bandwidth_check([1, 2], [10, 20], RW)


def test_uniform_error_and_empty_support():
    p = _path(4000, 9)
    s = make_sample(p, np.sin, sigma_u=0.0, seed=0)
    fld = local_time_field(p, "triangular", 1.0)
    sup = []
    for h in (1.0, 0.5, 0.25):
        fit = nadaraya_watson(s, h=h, x_grid=p.d_n * fld.a_grid)
        err = uniform_error(fit, np.sin, support_set(fld, p, 0.05))
        assert err.n_points > 0
        sup.append(err.sup_error)
    # noiseless data: only smoothing bias remains
    assert sup == sorted(sup, reverse=True)
    fit = nadaraya_watson(s, h=1.0, x_grid=p.d_n * fld.a_grid)
    assert uniform_error(fit, np.sin, support_set(fld, p, 0.05)).meets_floor
    with pytest.raises(EmptySupportError):
        uniform_error(fit, np.sin, support_set(fld, p, fld.values.max() + 1))


def test_ar1_noise_and_validation():
    p = _path(20_000, 2)
    s = make_sample(p, np.sin, sigma_u=1.0, seed=3, noise="ar1", ar_coef=0.5)
    u = s.y - np.sin(p.x)
    assert abs(u.var() - 1) < 0.05
    assert abs(np.corrcoef(u[1:], u[:-1])[0, 1] - 0.5) < 0.03
    with pytest.raises(ConfigurationError):
        make_sample(p, np.sin, noise="ar1", ar_coef=0.7)
    with pytest.raises(ConfigurationError):
        make_sample(p, np.sin, sigma_u=-1)


def test_negative_kernel_rejected():
    with pytest.raises(ConfigurationError):
        nadaraya_watson(RegressionSample(np.zeros(3), np.zeros(3), np.sin), -1.0 * triangular(), 1.0)


def test_estimator_api():
    p = _path(1500, 5)
    s = make_sample(p, np.sin, seed=1)
    est = NadarayaWatson(bandwidth=1.1).fit(s.x, s.y)
    grid = np.linspace(-5, 5, 11)
    assert np.allclose(est.predict(grid), nadaraya_watson(s, h=1.1, x_grid=grid).m_hat, equal_nan=True)
    assert est.get_params() == {"kernel": "triangular", "bandwidth": 1.1, "gamma": 0.2}
    assert NadarayaWatson(bandwidth="iqr").fit(s.x, s.y).h_ == pytest.approx(realize_bandwidth("iqr", s.x))
