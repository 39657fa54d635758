from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfsm_localtime.errors import ConfigurationError
from lfsm_localtime.innovations import (
    InnovationModel,
    calibrate_norming,
    char_fn,
    sample_innovations,
)


def test_gaussian_population_variance_two():
    m = InnovationModel(2.0, family="gaussian", scale_cal=math.sqrt(2))
    draws = sample_innovations(m, 4, 7)
    assert draws.shape == (4,)
    big = sample_innovations(m, 200_000, 7)
    assert abs(big.var() - 2.0) < 0.03


def test_same_seed_same_draws():
    m = InnovationModel(1.5, family="exact-stable")
    assert np.array_equal(sample_innovations(m, 100, 3), sample_innovations(m, 100, 3))
    assert not np.array_equal(sample_innovations(m, 100, 3), sample_innovations(m, 100, 4))


def test_cauchy_median_near_zero():
    m = InnovationModel(1.0, family="exact-stable")
    assert abs(np.median(sample_innovations(m, 100_000, 1))) < 0.02


def test_stable_empirical_cf_at_one():
    m = InnovationModel(1.5, family="exact-stable")
    eps = sample_innovations(m, 1_000_000, 11)
    lam = np.linspace(-3, 3, 21)
    emp = np.array([np.mean(np.exp(1j * l * eps)) for l in lam])
    assert np.max(np.abs(emp - char_fn(m, lam))) < 5e-3
    assert abs(np.mean(np.cos(eps)) - math.exp(-1)) < 5e-3


def test_skewed_stable_cf_matches_samples():
    m = InnovationModel(1.5, skew=0.6, family="exact-stable")
    eps = sample_innovations(m, 400_000, 5)
    for lam in (-1.0, 0.5, 1.5):
        assert abs(np.mean(np.exp(1j * lam * eps)) - char_fn(m, lam)) < 6e-3


def test_char_fn_values():
    g = InnovationModel(2.0, family="gaussian", scale_cal=math.sqrt(2))
    assert char_fn(g, 1.0) == pytest.approx(math.exp(-1))
    s = InnovationModel(1.5, family="exact-stable")
    assert char_fn(s, 2.0).real == pytest.approx(math.exp(-(2**1.5)))
    assert char_fn(s, 2.0).real == pytest.approx(0.0591, abs=1e-4)


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.3, 2.0),
    skew=st.floats(-1, 1),
    lam=st.floats(-20, 20),
)
def test_char_fn_properties(alpha, skew, lam):
    if alpha == 1.0:
        skew = 0.0
    m = InnovationModel(alpha, skew=skew, family="exact-stable")
    assert char_fn(m, 0.0) == 1
    assert abs(char_fn(m, lam)) <= 1 + 1e-15
    assert char_fn(m, -lam) == pytest.approx(np.conj(char_fn(m, lam)))
    if skew == 0.0:
        assert char_fn(m, lam).imag == 0.0


def test_student_t_cf_matches_samples():
    m = InnovationModel(2.0, family="student-t", df=5)
    eps = sample_innovations(m, 400_000, 2)
    for lam in (0.3, 1.0, 2.0):
        assert abs(np.mean(np.cos(lam * eps)) - char_fn(m, lam).real) < 5e-3


def test_norming_constants():
    assert calibrate_norming(InnovationModel(1.5, family="exact-stable"))(10) == 1.0
    assert calibrate_norming(InnovationModel(2.0, family="gaussian"))(10) == pytest.approx(1.0)
    t5 = calibrate_norming(InnovationModel(2.0, family="student-t", df=5))
    assert t5(1) == t5(1000) == pytest.approx(math.sqrt(5 / 3 / 2))


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        ({"alpha": 2.5}, "alpha"),
        ({"alpha": 1.0, "skew": 0.5, "family": "exact-stable"}, "skew must be 0"),
        ({"alpha": 1.5, "family": "gaussian"}, "gaussian"),
        ({"scale_cal": -1.0}, "scale_cal"),
        ({"family": "nope"}, "family"),
    ],
)
def test_invalid_models(kwargs, fragment):
    with pytest.raises(ConfigurationError, match=fragment):
        InnovationModel(**kwargs)
