"""Kernel local-time functionals of a path and related occupation statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DomainError, StatisticalPowerError
from .function_space import RealFunction, kernel
from .linear_process import PathBundle

__all__ = [
    "IncrementReport",
    "LocalTimeEstimator",
    "LocalTimeField",
    "SupportSet",
    "beta_bar",
    "default_a_grid",
    "increment_moments",
    "kernel_sums",
    "local_time_field",
    "occupation_cdf",
    "reference_local_time",
    "support_set",
]

_CHUNK = 1 << 22


def default_a_grid(M: float = 3.0, mesh: float = 2.0**-7) -> np.ndarray:
    """Uniform grid on ``[-M, M]``."""
    k = int(round(M / mesh))
    return mesh * np.arange(-k, k + 1)


def kernel_sums(x_sorted, centers, f: RealFunction, h: float, weights=None) -> np.ndarray:
    """``sum_t w_t f((x_t - c) / h)`` for every centre ``c``.

    ``x_sorted`` must be ascending (``weights`` aligned with it).  For compactly
    supported ``f`` only the points inside each centre's window are visited.
    """
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    x = np.asarray(x_sorted, dtype=float)
    c = np.atleast_1d(np.asarray(centers, dtype=float))
    w = None if weights is None else np.asarray(weights, dtype=float)
    out = np.zeros(c.size)
    if f.support is None:
        step = max(1, _CHUNK // max(1, x.size))
        for s in range(0, c.size, step):
            blk = f((x[None, :] - c[s:s + step, None]) / h)
            out[s:s + step] = blk.sum(axis=1) if w is None else blk @ w
        return out
    s0, s1 = f.support
    lo = np.searchsorted(x, c + h * s0, side="left")
    hi = np.searchsorted(x, c + h * s1, side="right")
    cnt = hi - lo
    start = 0
    while start < c.size:
        # grow the block until it holds about _CHUNK window entries
        cum = np.cumsum(cnt[start:])
        stop = start + max(1, int(np.searchsorted(cum, _CHUNK, side="right")))
        bc = cnt[start:stop]
        tot = int(bc.sum())
        if tot:
            owner = np.repeat(np.arange(stop - start), bc)
            first = np.cumsum(bc) - bc
            idx = np.arange(tot) - np.repeat(first - lo[start:stop], bc)
            vals = f((x[idx] - c[start:stop][owner]) / h)
            if w is not None:
                vals = vals * w[idx]
            out[start:stop] = np.bincount(owner, weights=vals, minlength=stop - start)
        start = stop
    return out


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    """Values of ``L_n^f(a, h) = (e_n h)^-1 sum_t f((x_t - d_n a) / h)`` on a grid."""

    a_grid: np.ndarray
    values: np.ndarray
    f_ref: RealFunction
    h: float
    n: int
    d_n: float
    e_n: float

    def closed_form_mass(self) -> float:
        """``int L_n^f(a, h) da = n int f / (e_n d_n)``, independent of the path."""
        return self.n * self.f_ref.integral / (self.e_n * self.d_n)

    def grid_mass(self) -> float:
        return float(np.trapezoid(self.values, self.a_grid))

    def at(self, a):
        """Linear interpolation, zero outside the grid."""
        return np.interp(a, self.a_grid, self.values, left=0.0, right=0.0)

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["a", "value"])
            for a, v in zip(self.a_grid, self.values):
                w.writerow([repr(float(a)), repr(float(v))])


def _as_function(f) -> RealFunction:
    return kernel(f) if isinstance(f, str) else f


def local_time_field(path: PathBundle, f, h: float = 1.0, a_grid=None) -> LocalTimeField:
    """Evaluate ``L_n^f(., h)`` of ``path`` on ``a_grid`` (default ``[-3, 3]``, mesh 2^-7)."""
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    f = _as_function(f)
    a = default_a_grid() if a_grid is None else np.atleast_1d(np.asarray(a_grid, dtype=float))
    if not np.all(np.isfinite(a)):
        raise DomainError("a_grid must be finite")
    xs = np.sort(path.x)
    vals = kernel_sums(xs, path.d_n * a, f, h) / (path.e_n * h)
    return LocalTimeField(a, vals, f, float(h), path.n, path.d_n, path.e_n)


def occupation_cdf(path: PathBundle, a_grid) -> np.ndarray:
    """``mu_n(a) = n^-1 #{t : x_t / d_n <= a}``."""
    z = np.sort(path.x / path.d_n)
    return np.searchsorted(z, np.asarray(a_grid, dtype=float), side="right") / path.n


def reference_local_time(X, a_grid, bin_width: float | None = None, smooth: bool = False) -> np.ndarray:
    """Occupation density of a path sampled on a uniform grid of ``[0, 1]``.

    Each of the ``len(X)`` samples carries time ``1 / len(X)``; bins of width
    ``bin_width`` (default the grid mesh) are centred on ``a_grid``.  With
    ``smooth`` the histogram is convolved with the triangular kernel of
    half-width ``bin_width``.
    """
    X = np.asarray(X, dtype=float)
    a = np.asarray(a_grid, dtype=float)
    if bin_width is None:
        bin_width = float(a[1] - a[0]) if a.size > 1 else 1.0
    if not bin_width > 0:
        raise DomainError(f"bin_width must be > 0, got {bin_width}")
    idx = np.floor((X - a[0]) / bin_width + 0.5).astype(np.int64)
    keep = (idx >= 0) & (idx < a.size)
    L = np.bincount(idx[keep], minlength=a.size)[: a.size] / (X.size * bin_width)
    if smooth:
        L = np.convolve(L, [0.25, 0.5, 0.25], mode="same")
    return L


@dataclass(frozen=True, eq=False)
class SupportSet:
    """``A = {x : L_n(x / d_n) >= epsilon}`` and the share of the path outside it."""

    epsilon: float
    field: LocalTimeField
    coverage: float

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.epsilon == 0:
            return np.ones(x.shape, dtype=bool)
        return self.field.at(x / self.field.d_n) >= self.epsilon

    @property
    def grid_mask(self) -> np.ndarray:
        return self.contains(self.field.d_n * self.field.a_grid)


def support_set(field: LocalTimeField, path: PathBundle, epsilon: float) -> SupportSet:
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    tmp = SupportSet(float(epsilon), field, 0.0)
    coverage = float(np.mean(~tmp.contains(path.x)))
    return SupportSet(float(epsilon), field, coverage)


def beta_bar(H: float) -> float:
    """Largest admissible Fourier-norm order ``min((1 - H) / (2H), 1)``."""
    if not 0 < H < 1:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    return min((1.0 - H) / (2.0 * H), 1.0)


@dataclass(frozen=True)
class IncrementReport:
    deltas: np.ndarray
    moments: np.ndarray  # E|dL|^p per gap
    root_moments: np.ndarray  # moments ** (1/p)
    slope: float
    p: int


def increment_moments(base, shifted, deltas, p: int = 2, min_reps: int = 200) -> IncrementReport:
    """Empirical ``E|L(a + delta) - L(a)|^p`` across replications.

    Parameters
    ----------
    base : array of shape (R,)
        ``L_n^phi(a)`` per replication.
    shifted : array of shape (R, G)
        ``L_n^phi(a + delta_g)`` per replication and gap.
    deltas : array of shape (G,)
    """
    if p < 2 or p % 2:
        raise DomainError(f"p must be an even integer >= 2, got {p}")
    base = np.asarray(base, dtype=float)
    shifted = np.asarray(shifted, dtype=float).reshape(base.size, -1)
    deltas = np.asarray(deltas, dtype=float)
    if base.size < min_reps:
        raise StatisticalPowerError(f"need >= {min_reps} replications, got {base.size}")
    mom = np.mean(np.abs(shifted - base[:, None]) ** p, axis=0)
    root = mom ** (1.0 / p)
    slope = math.nan
    ok = (deltas > 0) & (root > 0)
    if ok.sum() >= 2:
        slope = float(np.polyfit(np.log(deltas[ok]), np.log(root[ok]), 1)[0])
    return IncrementReport(deltas, mom, root, slope, p)


class LocalTimeEstimator(TransformerMixin, BaseEstimator):
    """Estimator wrapper: ``fit`` stores a path, ``transform`` evaluates ``L_n^f``.

    Parameters
    ----------
    kernel : str or RealFunction
    h : float
        Bandwidth.
    d_n, e_n : float, optional
        Norming constants; taken from a :class:`PathBundle` when one is
        passed to ``fit``, else default to ``sqrt(n)``.
    """

    def __init__(self, kernel="triangular", h=1.0, d_n=None, e_n=None):
        self.kernel = kernel
        self.h = h
        self.d_n = d_n
        self.e_n = e_n

    def fit(self, X, y=None):
        if isinstance(X, PathBundle):
            path = X
        else:
            x = np.asarray(X, dtype=float).ravel()
            root = math.sqrt(x.size)
            path = PathBundle.from_path(x, self.d_n or root, self.e_n or root)
        if not self.h > 0:
            raise DomainError(f"bandwidth must be > 0, got {self.h}")
        self.path_ = path
        self.n_ = path.n
        return self

    def transform(self, X):
        check_is_fitted(self, "path_")
        a = np.asarray(X, dtype=float).ravel()
        return local_time_field(self.path_, self.kernel, self.h, a).values
