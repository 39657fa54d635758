"""Nadaraya-Watson regression on an integrated covariate."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .errors import ConfigurationError, DomainError, EmptySupportError, StatisticalPowerError
from .function_space import RealFunction, kernel
from .linear_process import NormingConstants, PathBundle, ProcessSpec
from .innovations import NormingSequence
from .local_time import SupportSet, kernel_sums

__all__ = [
    "BANDWIDTH_RULES",
    "BandwidthReport",
    "FitResult",
    "NadarayaWatson",
    "RegressionSample",
    "UniformError",
    "bandwidth_check",
    "make_sample",
    "nadaraya_watson",
    "realize_bandwidth",
    "uniform_error",
]


@dataclass(frozen=True, eq=False)
class RegressionSample:
    """``y_t = m0(x_t) + u_t``."""

    x: np.ndarray
    y: np.ndarray
    m0: Callable
    sigma_u: float = 0.0
    noise: str = "iid"
    ar_coef: float = 0.0

    def __post_init__(self):
        if np.shape(self.x) != np.shape(self.y):
            raise ConfigurationError("x and y lengths differ")


def make_sample(path, m0: Callable, sigma_u: float = 0.2, seed=None, noise: str = "iid",
                ar_coef: float = 0.0) -> RegressionSample:
    """Responses with Gaussian ``u_t``, i.i.d. or AR(1) with ``|ar_coef| <= 0.5``.

    The noise stream is independent of the covariate innovations.
    """
    x = path.x if isinstance(path, PathBundle) else np.asarray(path, dtype=float)
    if sigma_u < 0:
        raise ConfigurationError("sigma_u must be >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal(x.size)
    if noise == "iid":
        u = sigma_u * z
    elif noise == "ar1":
        if abs(ar_coef) > 0.5:
            raise ConfigurationError("AR(1) coefficient must satisfy |rho| <= 0.5")
        u = np.empty(x.size)
        prev = 0.0
        scale = sigma_u * math.sqrt(1 - ar_coef**2)
        for t in range(x.size):
            prev = ar_coef * prev + scale * z[t] if t else sigma_u * z[0]
            u[t] = prev
    else:
        raise ConfigurationError(f"noise must be 'iid' or 'ar1', got {noise!r}")
    return RegressionSample(x, m0(x) + u, m0, sigma_u, noise, ar_coef)


def _iqr_rule(x, gamma: float = 0.2) -> float:
    q75, q25 = np.percentile(x, [75, 25])
    return float(q75 - q25) * x.size ** -gamma


def _increment_rule(x, gamma: float = 0.2) -> float:
    return float(np.std(np.diff(x, prepend=0.0))) * x.size ** -gamma


BANDWIDTH_RULES = {
    "iqr": _iqr_rule,  # IQR(x) n^-gamma
    "increment": _increment_rule,  # sd(x_t - x_{t-1}) n^-gamma
}


def realize_bandwidth(h, x, gamma: float = 0.2) -> float:
    """A fixed positive ``h``, or the value of a named rule on the path ``x``."""
    if isinstance(h, str):
        if h not in BANDWIDTH_RULES:
            raise ConfigurationError(f"unknown bandwidth rule {h!r}; known: {sorted(BANDWIDTH_RULES)}")
        h = BANDWIDTH_RULES[h](np.asarray(x, dtype=float), gamma)
    h = float(h)
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    return h


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimates on a grid; ``m_hat`` is NaN where ``denominator == 0``."""

    x_grid: np.ndarray
    m_hat: np.ndarray
    denominator: np.ndarray
    h_realized: float

    @property
    def defined(self) -> np.ndarray:
        return self.denominator > 0

    def to_csv(self, path, support: SupportSet | None = None, header_comment: str | None = None):
        inside = support.contains(self.x_grid) if support is not None else np.ones(self.x_grid.size, bool)
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["x", "m_hat", "denominator", "in_support"])
            for row in zip(self.x_grid, self.m_hat, self.denominator, inside):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])


def _check_kernel(K: RealFunction):
    probe = np.linspace(-10, 10, 4001) if K.support is None else np.linspace(*K.support, 4001)
    if np.any(K(probe) < 0):
        raise ConfigurationError(f"kernel {K.name} takes negative values")
    if abs(K.integral - 1.0) > 1e-8:
        raise ConfigurationError(f"kernel {K.name} integrates to {K.integral}, not 1")


def _nw(x, y, K: RealFunction, h: float, x_grid):
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    den = kernel_sums(xs, x_grid, K, h) / h
    num = kernel_sums(xs, x_grid, K, h, weights=ys) / h
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return m, den


def nadaraya_watson(sample: RegressionSample, K="triangular", h="iqr", x_grid=None,
                    gamma: float = 0.2, check_kernel: bool = True) -> FitResult:
    """``m_hat(x) = sum K_h(x_t - x) y_t / sum K_h(x_t - x)``."""
    K = kernel(K) if isinstance(K, str) else K
    if check_kernel:
        _check_kernel(K)
    x = np.asarray(sample.x, dtype=float)
    y = np.asarray(sample.y, dtype=float)
    hr = realize_bandwidth(h, x, gamma)
    if x_grid is None:
        x_grid = np.linspace(x.min(), x.max(), 513)
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    m, den = _nw(x, y, K, hr, x_grid)
    return FitResult(x_grid, m, den, hr)


class NadarayaWatson(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`nadaraya_watson`.

    Parameters
    ----------
    kernel : str or RealFunction
    bandwidth : float or str
        Fixed ``h`` or a rule name from :data:`BANDWIDTH_RULES`, realized on
        the training covariate in ``fit``.
    gamma : float
        Rate exponent used by bandwidth rules.
    """

    def __init__(self, kernel="triangular", bandwidth="iqr", gamma=0.2):
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.gamma = gamma

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False, y_numeric=True)
        x = np.asarray(X, dtype=float).ravel()
        K = kernel(self.kernel) if isinstance(self.kernel, str) else self.kernel
        _check_kernel(K)
        self.kernel_ = K
        self.h_ = realize_bandwidth(self.bandwidth, x, self.gamma)
        self.x_ = x
        self.y_ = np.asarray(y, dtype=float)
        return self

    def predict(self, X):
        check_is_fitted(self, "h_")
        grid = np.asarray(X, dtype=float).ravel()
        return _nw(self.x_, self.y_, self.kernel_, self.h_, grid)[0]


@dataclass(frozen=True)
class BandwidthReport:
    n: np.ndarray
    h: np.ndarray
    slope: float  # fitted exponent of h_n in n
    ratio_d: np.ndarray  # h_n / d_n
    ratio_e: np.ndarray  # log(n)^2 / (h_n e_n)
    window: tuple  # admissible open interval for the exponent
    admissible: bool


def bandwidth_check(h_values, n_values, spec: ProcessSpec, rho: NormingSequence | None = None) -> BandwidthReport:
    """Empirical check that ``h_n = o(d_n)`` and ``1/h_n = o(e_n / log^2 n)``.

    Both ratios must decrease along the ladder.  The admissible exponent
    window for ``h_n ~ n^g`` is ``(-(1 - H), H)``, up to slowly varying terms.
    """
    h = np.asarray(h_values, dtype=float)
    n = np.asarray(n_values, dtype=float)
    if h.size < 3 or h.size != n.size:
        raise StatisticalPowerError("need >= 3 matching ladder points")
    if np.any(np.diff(n) <= 0):
        raise ConfigurationError("n ladder must be strictly increasing")
    nc = NormingConstants(spec, rho or NormingSequence())
    d = np.array([nc.d(int(k)) for k in n])
    e = np.array([nc.e(int(k)) for k in n])
    rd = h / d
    re = np.log(n) ** 2 / (h * e)
    slope = float(np.polyfit(np.log(n), np.log(h), 1)[0])
    H = spec.H
    window = (-(1.0 - H), H)
    ok = bool(np.all(np.diff(rd) < 0) and np.all(np.diff(re) < 0) and window[0] < slope < window[1])
    return BandwidthReport(n, h, slope, rd, re, window, ok)


@dataclass(frozen=True)
class UniformError:
    sup_error: float
    inf_denominator: float
    floor: float  # epsilon * e_n
    meets_floor: bool
    n_points: int


def uniform_error(fit: FitResult, m0: Callable, support: SupportSet,
                  interpolation_tol: float = 0.05) -> UniformError:
    """Sup error and inf denominator over grid points inside the support set."""
    mask = support.contains(fit.x_grid) & fit.defined
    if not mask.any():
        raise EmptySupportError(f"no defined grid point lies in the support set at epsilon={support.epsilon}")
    err = float(np.max(np.abs(fit.m_hat[mask] - m0(fit.x_grid[mask]))))
    inf_den = float(np.min(fit.denominator[mask]))
    floor = support.epsilon * support.field.e_n
    return UniformError(err, inf_den, floor, inf_den >= floor * (1 - interpolation_tol), int(mask.sum()))
