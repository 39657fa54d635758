"""Bounded integrable test functions, their norms and bracketing covers.

Fourier transforms follow ``fhat(lam) = int exp(i lam x) f(x) dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    RefinementNeededError,
)

__all__ = [
    "BetaNormEstimate",
    "Bracket",
    "BracketCover",
    "FiniteClass",
    "FunctionClass",
    "KERNELS",
    "ParametricClass",
    "RealFunction",
    "SmoothBall",
    "beta_moment",
    "beta_moment_inf",
    "beta_norm",
    "bracket_cover",
    "default_lambda_grid",
    "epanechnikov",
    "gaussian",
    "indicator",
    "kernel",
    "location_family",
    "piecewise_linear",
    "shifted_diff",
    "trapezoid",
    "triangular",
]


@dataclass(frozen=True, eq=False)
class RealFunction:
    """A bounded integrable function with analytic metadata.

    ``func`` must be vectorized.  ``breakpoints`` lists points where ``f`` may
    jump or kink; between them ``f`` is ``piece_lipschitz``-Lipschitz.
    ``lipschitz`` is a global constant, or ``None`` when ``f`` is not
    Lipschitz.  ``fhat_decay`` is ``p`` in ``|fhat(lam)| = O(|lam|^-p)``.
    Norms not supplied in ``known`` are computed by quadrature.
    """

    func: Callable
    fhat_closed: Callable | None = None
    integral_exact: float | None = None
    support: tuple | None = None
    lipschitz: float | None = None
    piece_lipschitz: float | None = None
    breakpoints: tuple = ()
    fhat_decay: float = 0.0
    name: str = "f"
    known: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def __repr__(self):
        return f"RealFunction({self.name})"

    # -- quadrature helpers -------------------------------------------------
    def _pieces(self, extra=()):
        pts = sorted(set(self.breakpoints) | set(extra))
        if self.support is None:
            return None
        lo, hi = self.support
        cuts = [lo] + [p for p in pts if lo < p < hi] + [hi]
        return list(zip(cuts[:-1], cuts[1:]))

    def integrate(self, g: Callable, extra_points=()) -> float:
        """``int g(x) dx`` for ``g`` supported where ``f`` is."""
        pieces = self._pieces(extra_points)
        kw = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
        if pieces is None:
            inner = sorted(set(self.breakpoints) | set(extra_points))
            if inner:
                lo, hi = inner[0], inner[-1]
                total = integrate.quad(g, -np.inf, lo, **kw)[0]
                cuts = inner
                for a, b in zip(cuts[:-1], cuts[1:]):
                    total += integrate.quad(g, a, b, **kw)[0]
                return total + integrate.quad(g, hi, np.inf, **kw)[0]
            return integrate.quad(g, -np.inf, 0.0, **kw)[0] + integrate.quad(g, 0.0, np.inf, **kw)[0]
        return math.fsum(integrate.quad(g, a, b, **kw)[0] for a, b in pieces if b > a)

    @cached_property
    def integral(self) -> float:
        if self.integral_exact is not None:
            return self.integral_exact
        return self.integrate(lambda x: float(self.func(np.asarray(x))))

    @cached_property
    def l1_norm(self) -> float:
        if "l1" in self.known:
            return self.known["l1"]
        return self.integrate(lambda x: abs(float(self.func(np.asarray(x)))))

    @cached_property
    def l2_norm(self) -> float:
        if "l2" in self.known:
            return self.known["l2"]
        return math.sqrt(self.integrate(lambda x: float(self.func(np.asarray(x))) ** 2))

    @cached_property
    def sup_norm(self) -> float:
        if "sup" in self.known:
            return self.known["sup"]
        if self.support is not None:
            lo, hi = self.support
            grid = np.linspace(lo, hi, 20001)
        else:
            grid = np.linspace(-50, 50, 200001)
        pts = np.concatenate([grid, np.asarray(self.breakpoints, dtype=float)])
        val = float(np.max(np.abs(self.func(pts))))
        if self.piece_lipschitz is not None:
            val += self.piece_lipschitz * (grid[1] - grid[0]) / 2
        return val

    def fhat(self, lam):
        """Fourier transform; closed form when available, else oscillatory quadrature."""
        lam = np.asarray(lam, dtype=float)
        if self.fhat_closed is not None:
            out = np.asarray(self.fhat_closed(lam), dtype=complex)
            return out if out.ndim else complex(out)
        if self.support is None:
            raise ConfigurationError(
                f"{self.name}: numeric Fourier transform needs compact support or a closed form"
            )
        flat = np.atleast_1d(lam).ravel()
        out = np.array([self._fhat_numeric(v) for v in flat]).reshape(np.shape(lam))
        return out if out.ndim else complex(out)

    def _fhat_numeric(self, lam: float) -> complex:
        f = lambda x: float(self.func(np.asarray(x)))
        re = im = 0.0
        for a, b in self._pieces():
            if b <= a:
                continue
            if lam == 0.0:
                re += integrate.quad(f, a, b, limit=200)[0]
                continue
            re += integrate.quad(f, a, b, weight="cos", wvar=lam, limit=400)[0]
            im += integrate.quad(f, a, b, weight="sin", wvar=lam, limit=400)[0]
        return complex(re, im)

    @property
    def has_closed_fhat(self) -> bool:
        return self.fhat_closed is not None

    # -- algebra --------------------------------------------------------------
    def shift(self, a: float) -> "RealFunction":
        """``x -> f(x - a)``."""
        g = self
        fh = None
        if g.fhat_closed is not None:
            fh = lambda lam: np.exp(1j * lam * a) * g.fhat_closed(lam)
        return RealFunction(
            func=lambda x: g.func(x - a),
            fhat_closed=fh,
            integral_exact=g.integral_exact,
            support=None if g.support is None else (g.support[0] + a, g.support[1] + a),
            lipschitz=g.lipschitz,
            piece_lipschitz=g.piece_lipschitz,
            breakpoints=tuple(b + a for b in g.breakpoints),
            fhat_decay=g.fhat_decay,
            name=f"{g.name}(.-{a:g})",
            known={k: v for k, v in g.known.items()},
        )

    def dilate(self, h: float) -> "RealFunction":
        """``x -> f(x / h) / h`` (preserves the integral)."""
        if not h > 0:
            raise DomainError("dilation needs h > 0")
        g = self
        fh = None if g.fhat_closed is None else (lambda lam: g.fhat_closed(lam * h))
        known = {}
        if "l1" in g.known:
            known["l1"] = g.known["l1"]
        if "sup" in g.known:
            known["sup"] = g.known["sup"] / h
        if "l2" in g.known:
            known["l2"] = g.known["l2"] / math.sqrt(h)
        return RealFunction(
            func=lambda x: g.func(x / h) / h,
            fhat_closed=fh,
            integral_exact=g.integral_exact,
            support=None if g.support is None else (g.support[0] * h, g.support[1] * h),
            lipschitz=None if g.lipschitz is None else g.lipschitz / h**2,
            piece_lipschitz=None if g.piece_lipschitz is None else g.piece_lipschitz / h**2,
            breakpoints=tuple(b * h for b in g.breakpoints),
            fhat_decay=g.fhat_decay,
            name=f"{g.name}_h{h:g}",
            known=known,
        )

    def __mul__(self, c: float) -> "RealFunction":
        return _lincomb([(float(c), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other: "RealFunction") -> "RealFunction":
        return _lincomb([(1.0, self), (1.0, other)])

    def __sub__(self, other: "RealFunction") -> "RealFunction":
        return _lincomb([(1.0, self), (-1.0, other)])


def _lincomb(terms) -> RealFunction:
    coefs = [c for c, _ in terms]
    funcs = [f for _, f in terms]
    closed = all(f.fhat_closed is not None for f in funcs)
    fh = None
    if closed:
        fh = lambda lam: sum(c * f.fhat_closed(lam) for c, f in zip(coefs, funcs))
    ints = [f.integral_exact for f in funcs]
    integral = None if any(i is None for i in ints) else sum(c * i for c, i in zip(coefs, ints))
    supports = [f.support for f in funcs]
    support = None
    if all(s is not None for s in supports):
        support = (min(s[0] for s in supports), max(s[1] for s in supports))
    lips = [f.lipschitz for f in funcs]
    lip = None if any(v is None for v in lips) else sum(abs(c) * v for c, v in zip(coefs, lips))
    plips = [f.piece_lipschitz if f.piece_lipschitz is not None else f.lipschitz for f in funcs]
    plip = None if any(v is None for v in plips) else sum(abs(c) * v for c, v in zip(coefs, plips))
    bps = tuple(sorted({b for f in funcs for b in f.breakpoints}))
    known = {}
    if len(funcs) == 1:
        c = abs(coefs[0])
        known = {k: c * v for k, v in funcs[0].known.items()}
    return RealFunction(
        func=lambda x: sum(c * f.func(x) for c, f in zip(coefs, funcs)),
        fhat_closed=fh,
        integral_exact=integral,
        support=support,
        lipschitz=lip,
        piece_lipschitz=plip,
        breakpoints=bps,
        fhat_decay=min(f.fhat_decay for f in funcs),
        name=" + ".join(f"{c:g}*{f.name}" for c, f in zip(coefs, funcs)),
        known=known,
    )


# -- library kernels -----------------------------------------------------------

def triangular() -> RealFunction:
    """``(1 - |x|) 1{|x| <= 1}``."""
    return RealFunction(
        func=lambda x: np.clip(1.0 - np.abs(x), 0.0, None),
        fhat_closed=lambda lam: np.sinc(np.asarray(lam) / (2 * np.pi)) ** 2 + 0j,
        integral_exact=1.0,
        support=(-1.0, 1.0),
        lipschitz=1.0,
        piece_lipschitz=1.0,
        breakpoints=(-1.0, 0.0, 1.0),
        fhat_decay=2.0,
        name="triangular",
        known={"sup": 1.0, "l1": 1.0, "l2": math.sqrt(2.0 / 3.0)},
    )


def gaussian() -> RealFunction:
    """Standard normal density."""
    c = 1.0 / math.sqrt(2 * math.pi)
    return RealFunction(
        func=lambda x: c * np.exp(-0.5 * np.asarray(x) ** 2),
        fhat_closed=lambda lam: np.exp(-0.5 * np.asarray(lam) ** 2) + 0j,
        integral_exact=1.0,
        lipschitz=c * math.exp(-0.5),
        piece_lipschitz=c * math.exp(-0.5),
        fhat_decay=math.inf,
        name="gaussian",
        known={"sup": c, "l1": 1.0, "l2": (2 * math.sqrt(math.pi)) ** -0.5},
    )


def _epan_fhat(lam):
    lam = np.asarray(lam, dtype=float)
    out = np.empty_like(lam)
    small = np.abs(lam) < 1e-3
    l2 = lam[small] ** 2
    out[small] = 1.0 - l2 / 10.0 + l2 * l2 / 280.0
    lb = lam[~small]
    out[~small] = 3.0 * (np.sin(lb) - lb * np.cos(lb)) / lb**3
    return out + 0j


def epanechnikov() -> RealFunction:
    """``0.75 (1 - x^2) 1{|x| <= 1}``."""
    return RealFunction(
        func=lambda x: 0.75 * np.clip(1.0 - np.asarray(x) ** 2, 0.0, None),
        fhat_closed=_epan_fhat,
        integral_exact=1.0,
        support=(-1.0, 1.0),
        lipschitz=1.5,
        piece_lipschitz=1.5,
        breakpoints=(-1.0, 1.0),
        fhat_decay=2.0,
        name="epanechnikov",
        known={"sup": 0.75, "l1": 1.0, "l2": math.sqrt(0.6)},
    )


def indicator(lo: float = -0.5, hi: float = 0.5) -> RealFunction:
    """``1{lo <= x <= hi}``."""
    if not hi > lo:
        raise ConfigurationError("indicator needs hi > lo")

    def fh(lam):
        lam = np.asarray(lam, dtype=float)
        out = np.full(lam.shape, hi - lo, dtype=complex)
        nz = lam != 0
        ln = lam[nz]
        out[nz] = (np.exp(1j * ln * hi) - np.exp(1j * ln * lo)) / (1j * ln)
        return out

    return RealFunction(
        func=lambda x: ((np.asarray(x) >= lo) & (np.asarray(x) <= hi)).astype(float),
        fhat_closed=fh,
        integral_exact=hi - lo,
        support=(lo, hi),
        lipschitz=None,
        piece_lipschitz=0.0,
        breakpoints=(lo, hi),
        fhat_decay=1.0,
        name=f"1[{lo:g},{hi:g}]",
        known={"sup": 1.0, "l1": hi - lo, "l2": math.sqrt(hi - lo)},
    )


def shifted_diff(g: RealFunction, a1: float, a2: float) -> RealFunction:
    """``g(x - a1) - g(x - a2)``; its integral is exactly zero."""
    f = g.shift(a1) - g.shift(a2)
    known = {}
    if a1 == a2:
        known = {"sup": 0.0, "l1": 0.0, "l2": 0.0}
    return RealFunction(
        func=f.func,
        fhat_closed=f.fhat_closed,
        integral_exact=0.0 if g.integral_exact is not None or g.support is not None else None,
        support=f.support,
        lipschitz=f.lipschitz,
        piece_lipschitz=f.piece_lipschitz,
        breakpoints=f.breakpoints,
        fhat_decay=f.fhat_decay,
        name=f"{g.name}(.-{a1:g})-{g.name}(.-{a2:g})",
        known=known,
    )


def piecewise_linear(nodes, values, name: str = "pl") -> RealFunction:
    """Continuous piecewise-linear interpolant, zero outside the nodes.

    The end values must be 0 for continuity.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
        raise ConfigurationError("nodes must be strictly increasing with >= 2 entries")
    if values[0] != 0.0 or values[-1] != 0.0:
        raise ConfigurationError("piecewise-linear end values must be 0")
    slopes = np.abs(np.diff(values) / np.diff(nodes))
    lip = float(slopes.max()) if slopes.size else 0.0
    known = {"sup": float(np.max(np.abs(values)))}
    total = math.fsum(np.diff(nodes) * (values[:-1] + values[1:]) / 2)  # exact for PL
    if np.all(values >= 0):
        known["l1"] = total
    return RealFunction(
        func=lambda x: np.interp(x, nodes, values, left=0.0, right=0.0),
        integral_exact=total,
        support=(float(nodes[0]), float(nodes[-1])),
        lipschitz=lip,
        piece_lipschitz=lip,
        breakpoints=tuple(float(b) for b in nodes[1:-1]),
        fhat_decay=2.0,
        name=name,
        known=known,
    )


def trapezoid(lo: float, hi: float, ramp: float, height: float = 1.0) -> RealFunction:
    """``height`` on ``[lo, hi]``, linear ramps of width ``ramp`` on both sides."""
    if not (hi >= lo and ramp > 0):
        raise ConfigurationError("trapezoid needs hi >= lo and ramp > 0")
    f = piecewise_linear([lo - ramp, lo, hi, hi + ramp], [0.0, height, height, 0.0], name="trapezoid")
    known = dict(f.known)
    known["l1"] = abs(height) * (hi - lo + ramp)
    return RealFunction(
        func=f.func, support=f.support, lipschitz=f.lipschitz, piece_lipschitz=f.lipschitz,
        breakpoints=f.breakpoints,
        fhat_decay=2.0, name=f"trap[{lo:g},{hi:g}]", known=known,
        integral_exact=height * (hi - lo + ramp),
    )


KERNELS = {
    "triangular": triangular,
    "gaussian": gaussian,
    "epanechnikov": epanechnikov,
    "indicator": indicator,
}


def kernel(name: str, **params) -> RealFunction:
    """Look up a library kernel by name; ``shifted_diff`` takes ``g``, ``a1``, ``a2``."""
    if name == "shifted_diff":
        g = params.pop("g", "triangular")
        if isinstance(g, str):
            g = kernel(g)
        return shifted_diff(g, float(params.get("a1", 0.0)), float(params.get("a2", 1.0)))
    if name not in KERNELS:
        raise ConfigurationError(f"unknown kernel {name!r}; known: {sorted(KERNELS) + ['shifted_diff']}")
    return KERNELS[name](**params)


# -- norms --------------------------------------------------------------------

@dataclass(frozen=True)
class BetaNormEstimate:
    """Grid supremum of ``|fhat(lam)| / |lam|^beta``, a lower bound of the norm."""

    value: float
    refinement_delta: float
    n_points: int
    argmax: float

    def __float__(self):
        return self.value


def default_lambda_grid(n_points: int = 2048, lo: float = 1e-4, hi: float = 1e3) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n_points)


def beta_norm(
    f: RealFunction,
    beta: float,
    lambda_grid=None,
    rel_tol: float = 1e-3,
    max_doublings: int = 6,
) -> BetaNormEstimate:
    """Estimate ``sup_lam |fhat(lam)| / |lam|^beta`` on a log-spaced grid.

    Without an explicit grid, the default grid on ``[1e-4, 1e3]`` is doubled
    until the estimate moves by less than ``rel_tol``.  ``|fhat|`` is even
    for real ``f`` so only ``lam > 0`` is scanned.
    """
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta}")

    def scan(grid):
        ratio = np.abs(f.fhat(grid)) / grid**beta
        i = int(np.argmax(ratio))
        return float(ratio[i]), float(grid[i])

    if lambda_grid is not None:
        grid = np.asarray(lambda_grid, dtype=float)
        grid = grid[grid > 0]
        val, arg = scan(grid)
        return BetaNormEstimate(val, math.nan, grid.size, arg)

    n_pts = 2048
    val, arg = scan(default_lambda_grid(n_pts))
    delta = math.inf
    for _ in range(max_doublings):
        n_pts *= 2
        new, arg = scan(default_lambda_grid(n_pts))
        delta = abs(new - val) / new if new > 0 else abs(new - val)
        val = new
        if delta < rel_tol:
            break
    return BetaNormEstimate(val, delta, n_pts, arg)


def _sign_changes(f: RealFunction, n: int = 2049) -> list[float]:
    """Zeros of a compactly supported ``f`` where it changes sign (kinks of ``|f|``)."""
    x = np.linspace(*f.support, n)
    sgn = np.sign(f(x))
    nz = np.flatnonzero(sgn)
    out = []
    for i, j in zip(nz[:-1], nz[1:]):
        if sgn[i] == sgn[j]:
            continue
        if j == i + 1:
            out.append(optimize.brentq(lambda z: float(f.func(np.asarray(z))), x[i], x[j], xtol=1e-15))
        else:  # exact zeros on the grid
            out.extend({float(x[i + 1]), float(x[j - 1])})
    return out


def beta_moment(f: RealFunction, beta: float, shift: float = 0.0) -> float:
    """``int |f(x - shift)| |x|^beta dx``.

    Raises :class:`DivergenceError` when the tail contributions of a
    non-compactly supported ``f`` fail to shrink.
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta == 0 and shift == 0.0:
        return f.l1_norm
    g = lambda x: abs(float(f.func(np.asarray(x - shift)))) * abs(x) ** beta
    if f.support is not None:
        lo, hi = f.support[0] + shift, f.support[1] + shift
        kinks = [b + shift for b in (*f.breakpoints, *_sign_changes(f))]
        cuts = sorted({lo, hi, *kinks, *([0.0] if lo < 0 < hi else [])})
        cuts = [c for c in cuts if lo <= c <= hi]
        return math.fsum(
            integrate.quad(g, a, b, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            for a, b in zip(cuts[:-1], cuts[1:])
        )
    kw = dict(limit=400, epsabs=1e-14, epsrel=1e-12)
    total = 0.0
    edges = [0.0, 1.0]
    while edges[-1] < 1e8:
        edges.append(edges[-1] * 2)
    last = []
    for a, b in zip(edges[:-1], edges[1:]):
        piece = integrate.quad(g, a, b, **kw)[0] + integrate.quad(g, -b, -a, **kw)[0]
        total += piece
        last.append(piece)
        if b >= 64 and piece <= 1e-13 * max(total, 1e-300):
            return total
    if last[-1] > 1e-6 * total:
        raise DivergenceError(f"{f.name}: beta-moment of order {beta} does not converge")
    return total


def beta_moment_inf(f: RealFunction, beta: float) -> float:
    """``inf_y int |f(x - y)| |x|^beta dx`` by bounded scalar minimization."""
    if f.support is not None:
        lo, hi = f.support
        bounds = (-hi, -lo)
    else:
        bounds = (-10.0, 10.0)
    res = optimize.minimize_scalar(
        lambda y: beta_moment(f, beta, shift=y), bounds=bounds, method="bounded",
        options={"xatol": 1e-6},
    )
    return float(min(res.fun, beta_moment(f, beta)))


# -- classes and brackets --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Bracket:
    lower: RealFunction
    upper: RealFunction
    width: float  # ||upper - lower||_1 (upper bound when computed analytically)

    def contains(self, f, grid) -> bool:
        vals = f(grid)
        return bool(np.all(self.lower(grid) <= vals) and np.all(vals <= self.upper(grid)))


@dataclass
class BracketCover:
    """A cover of a class by continuous epsilon-brackets.

    ``brackets`` is ``None`` when the cover is too large to materialize;
    ``assign`` then builds the bracket of a given member on demand.
    """

    epsilon: float
    count: int
    brackets: list | None
    assign: Callable


def _pmin(f: RealFunction, g: RealFunction, name="min") -> RealFunction:
    return _combine(f, g, np.minimum, name)


def _pmax(f: RealFunction, g: RealFunction, name="max") -> RealFunction:
    return _combine(f, g, np.maximum, name)


def _combine(f, g, op, name):
    lips = [f.lipschitz, g.lipschitz]
    lip = None if any(v is None for v in lips) else max(lips)
    sup = None
    if f.support is not None and g.support is not None:
        sup = (min(f.support[0], g.support[0]), max(f.support[1], g.support[1]))
    return RealFunction(
        func=lambda x: op(f.func(x), g.func(x)),
        support=sup, lipschitz=lip, piece_lipschitz=lip,
        breakpoints=tuple(sorted(set(f.breakpoints) | set(g.breakpoints))),
        name=name,
    )


def _dense_extrema(f: RealFunction, nodes: np.ndarray, per_cell: int = 16):
    """Bounds on sup/inf of ``f`` over ``[x_{i-1}, x_{i+1}]`` for each node."""
    h = nodes[1] - nodes[0]
    fine = np.linspace(nodes[0] - h, nodes[-1] + h, (nodes.size + 1) * per_cell + 1)
    fine_h = fine[1] - fine[0]
    vals = f(fine)
    slack = (f.piece_lipschitz if f.piece_lipschitz is not None else 0.0) * fine_h
    bps = np.asarray(f.breakpoints, dtype=float)
    tiny = 1e-12 * max(1.0, float(np.max(np.abs(nodes))))
    probe = np.concatenate([bps - tiny, bps, bps + tiny]) if bps.size else np.empty(0)
    pvals = f(probe) if probe.size else np.empty(0)
    upper = np.empty(nodes.size)
    lower = np.empty(nodes.size)
    for i, x in enumerate(nodes):
        a, b = x - h, x + h
        sel = (fine >= a - 1e-15) & (fine <= b + 1e-15)
        cand = vals[sel]
        if probe.size:
            psel = (probe >= a) & (probe <= b)
            cand = np.concatenate([cand, pvals[psel]])
        upper[i] = cand.max() + slack
        lower[i] = cand.min() - slack
    return upper, lower


def _pl_bracket(f: RealFunction, eps: float, max_nodes: int = 1 << 16) -> Bracket:
    """Continuous piecewise-linear bracket around a compactly supported ``f``."""
    if f.support is None:
        raise RefinementNeededError(f"{f.name}: discontinuous members need compact support")
    lo, hi = f.support
    n_cells = 8
    while True:
        h = (hi - lo) / n_cells
        nodes = np.linspace(lo - h, hi + h, n_cells + 3)
        up, dn = _dense_extrema(f, nodes)
        up[0] = up[-1] = 0.0
        dn[0] = dn[-1] = 0.0
        up = np.maximum(up, 0.0) if np.all(f(nodes[[0, -1]]) == 0) else up
        upper = piecewise_linear(nodes, np.where(np.arange(nodes.size) % (nodes.size - 1) == 0, 0.0, up), "u")
        lower = piecewise_linear(nodes, np.where(np.arange(nodes.size) % (nodes.size - 1) == 0, 0.0, dn), "l")
        width = float(np.sum(np.diff(nodes) * (np.abs(up - dn)[:-1] + np.abs(up - dn)[1:]) / 2))
        if width < eps:
            return Bracket(lower, upper, width)
        n_cells *= 2
        if n_cells > max_nodes:
            raise RefinementNeededError(f"{f.name}: cannot reach bracket width {eps}")


class FunctionClass:
    """Base class: an indexed family with an envelope and a bracket builder."""

    envelope: RealFunction

    def sample(self, k: int, rng: np.random.Generator) -> list[RealFunction]:
        raise NotImplementedError

    def brackets(self, eps: float) -> BracketCover:
        raise NotImplementedError

    def _envelope_cover(self, eps):
        F = self.envelope
        bracket = Bracket(-F, F, 2 * F.l1_norm)
        return BracketCover(eps, 1, [bracket], lambda f: bracket)


def _pl_majorant(funcs: Sequence[RealFunction], n_cells: int = 256) -> RealFunction:
    """Continuous piecewise-linear ``F >= max_j |f_j|`` for compactly supported ``f_j``."""
    if any(f.support is None for f in funcs):
        raise ConfigurationError("an explicit envelope is required for non-compactly supported members")
    lo = min(f.support[0] for f in funcs)
    hi = max(f.support[1] for f in funcs)
    h = (hi - lo) / n_cells
    nodes = np.linspace(lo - h, hi + h, n_cells + 3)
    up = np.zeros(nodes.size)
    for f in funcs:
        u, d = _dense_extrema(f, nodes)
        up = np.maximum(up, np.maximum(np.abs(u), np.abs(d)))
    up[0] = up[-1] = 0.0
    return piecewise_linear(nodes, up, "envelope")


class FiniteClass(FunctionClass):
    """A finite list of members (a singleton is the single-function case)."""

    def __init__(self, members: Sequence[RealFunction], envelope: RealFunction | None = None):
        if not members:
            raise ConfigurationError("a finite class needs at least one member")
        self.members = list(members)
        self.envelope = envelope if envelope is not None else _pl_majorant(self.members)

    def sample(self, k, rng):
        idx = rng.integers(0, len(self.members), k)
        return [self.members[i] for i in idx]

    def brackets(self, eps):
        if eps <= 0:
            raise DomainError("epsilon must be > 0")
        if eps > 2 * self.envelope.l1_norm:
            return self._envelope_cover(eps)
        F = self.envelope
        out = []
        bump = triangular()
        for f in self.members:
            if f.lipschitz is not None:
                c = eps / 3.0
                lower = _pmax(f - c * bump, -F, "l")
                upper = _pmin(f + c * bump, F, "u")
                out.append(Bracket(lower, upper, 2 * c))
            else:
                out.append(_pl_bracket(f, eps))
        index = {id(f): i for i, f in enumerate(self.members)}

        def assign(f):
            return out[index[id(f)]]

        return BracketCover(eps, len(out), out, assign)


class ParametricClass(FunctionClass):
    """``{g(., theta) : theta in [lo, hi]}`` with a Hoelder modulus in ``theta``.

    ``modulus(center, radius)`` returns a continuous ``gdot >= 0`` such that
    ``|g(x, theta) - g(x, center)| <= gdot(x) |theta - center|^tau`` whenever
    ``|theta - center| <= radius``.
    """

    def __init__(self, g, theta_range, tau, modulus, envelope):
        lo, hi = theta_range
        if not hi > lo:
            raise ConfigurationError("theta_range must have hi > lo")
        if not 0 < tau <= 1:
            raise ConfigurationError("tau must lie in (0, 1]")
        self.g = g
        self.theta_range = (float(lo), float(hi))
        self.tau = tau
        self.modulus = modulus
        self.envelope = envelope

    def member(self, theta):
        return self.g(theta)

    def sample(self, k, rng):
        lo, hi = self.theta_range
        return [self.g(t) for t in rng.uniform(lo, hi, k)]

    def cells(self, N):
        lo, hi = self.theta_range
        r = (hi - lo) / (2 * N)
        return lo + r * (2 * np.arange(N) + 1), r

    def _width(self, N):
        centers, r = self.cells(N)
        return max(2 * r**self.tau * self.modulus(c, r).l1_norm for c in centers)

    def brackets(self, eps, max_cells: int = 1 << 20):
        if eps <= 0:
            raise DomainError("epsilon must be > 0")
        if eps > 2 * self.envelope.l1_norm:
            return self._envelope_cover(eps)
        # the width is monotone in N: bracket the minimal N, then bisect
        hi = 1
        while self._width(hi) >= eps:
            hi *= 2
            if hi > max_cells:
                raise RefinementNeededError(f"more than {max_cells} cells needed for eps={eps}")
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._width(mid) < eps:
                hi = mid
            else:
                lo = mid
        N = hi
        centers, r = self.cells(N)
        F = self.envelope
        out = []
        for c in centers:
            gd = self.modulus(c, r) * (r**self.tau)
            base = self.g(c)
            out.append(Bracket(_pmax(base - gd, -F, "l"), _pmin(base + gd, F, "u"), 2 * gd.l1_norm))
        tlo = self.theta_range[0]

        def assign(theta):
            j = int(min(N - 1, max(0, (theta - tlo) // (2 * r))))
            return out[j]

        return BracketCover(eps, N, out, assign)


def location_family(g: RealFunction, theta_range=(0.0, 1.0), ramp: float | None = None) -> ParametricClass:
    """``{g(. - theta)}`` for a compactly supported Lipschitz ``g``."""
    if g.support is None or g.lipschitz is None:
        raise ConfigurationError("location_family needs a compactly supported Lipschitz g")
    s0, s1 = g.support
    L = g.lipschitz
    ramp = (s1 - s0) / 8 if ramp is None else ramp

    def modulus(center, radius):
        return trapezoid(s0 + center - radius, s1 + center + radius, ramp, height=L)

    lo, hi = theta_range
    members = [g.shift(t) for t in np.linspace(lo, hi, 65)]
    envelope = _pl_majorant(members + [g.shift(lo), g.shift(hi)], n_cells=512)
    # the sampled majorant may dip between sample shifts; lift by the Lipschitz slack
    step = (hi - lo) / 64
    lift = trapezoid(s0 + lo, s1 + hi, ramp, height=L * step)
    # resample on the union of kinks so the sum stays an exact piecewise-linear function
    nodes = np.union1d(envelope.breakpoints + envelope.support, lift.breakpoints + lift.support)
    vals = envelope(nodes) + lift(nodes)
    vals[0] = vals[-1] = 0.0
    lifted = piecewise_linear(nodes, vals, "envelope")
    return ParametricClass(lambda t: g.shift(t), theta_range, 1.0, modulus, lifted)


class SmoothBall(FunctionClass):
    """``{f : |f| <= F, |f(x) - f(y)| <= L |x - y|^tau}`` on a window.

    Brackets come from a grid-projection net: node values of ``f`` are
    quantized to step ``eta`` and interpolated, then clipped to ``+-F``.
    The net is never materialized; :attr:`BracketCover.count` is its size.
    """

    def __init__(self, envelope: RealFunction, tau: float, L: float, window: float | None = None,
                 min_mesh: float = 1e-6):
        if not 0 < tau <= 1:
            raise ConfigurationError("tau must lie in (0, 1]")
        if not L > 0:
            raise ConfigurationError("L must be > 0")
        if window is None:
            if envelope.support is None:
                raise ConfigurationError("SmoothBall needs a window for non-compact envelopes")
            window = max(abs(envelope.support[0]), abs(envelope.support[1]))
        self.envelope = envelope
        self.tau = tau
        self.L = L
        self.window = float(window)
        self.min_mesh = min_mesh

    def _tail(self):
        F, W = self.envelope, self.window
        if F.support is not None and F.support[0] >= -W and F.support[1] <= W:
            return 0.0
        g = lambda x: float(F.func(np.asarray(x)))
        return 2 * (integrate.quad(g, W, np.inf, limit=200)[0] + integrate.quad(g, -np.inf, -W, limit=200)[0])

    def net_parameters(self, eps):
        W, L, tau = self.window, self.L, self.tau
        supF = self.envelope.sup_norm
        tail = self._tail()
        budget = eps - 2 * tail
        if budget <= 0:
            raise RefinementNeededError(f"window {W} too narrow for eps={eps}: envelope tail {tail:.3g}")
        eta = 0.99 * budget / (3 * 2 * W)
        delta = (0.99 * budget / (3 * 4 * W * L)) ** (1.0 / tau)
        delta = min(delta, 0.99 * budget / (3 * 4 * max(supF, 1e-300)))
        if delta < self.min_mesh:
            raise RefinementNeededError(f"eps={eps} needs mesh {delta:.3g} < {self.min_mesh:g}")
        n_cells = int(math.ceil(2 * W / delta))
        delta = 2 * W / n_cells
        nodes = np.linspace(-W, W, n_cells + 1)
        bound = 2 * W * (eta + 2 * L * delta**tau) + 2 * tail + 4 * supF * delta
        return eta, nodes, bound

    def brackets(self, eps):
        if eps <= 0:
            raise DomainError("epsilon must be > 0")
        if eps > 2 * self.envelope.l1_norm:
            return self._envelope_cover(eps)
        eta, nodes, bound = self.net_parameters(eps)
        F = self.envelope
        Fn = F(nodes)
        levels = np.floor(2 * Fn / eta).astype(np.int64) + 2
        count = math.prod(int(v) for v in levels)
        delta = nodes[1] - nodes[0]
        slack = self.L * delta**self.tau
        supF = F.sup_norm
        ramp_nodes = np.concatenate([[nodes[0] - delta], nodes, [nodes[-1] + delta]])

        def assign(f):
            q = eta * np.floor(f(nodes) / eta)
            up = np.concatenate([[q[0] + eta + slack + supF], q + eta + slack, [q[-1] + eta + slack + supF]])
            dn = np.concatenate([[q[0] - slack - supF], q - slack, [q[-1] - slack - supF]])
            # beyond the ramps the PL pieces continue at +-supF-ish levels, so clipping to +-F
            # leaves exactly the envelope outside the window
            u = RealFunction(
                func=lambda x: np.minimum(
                    np.interp(x, ramp_nodes, up, left=up[0] + supF, right=up[-1] + supF), F.func(x)),
                lipschitz=None, name="u",
            )
            lo = RealFunction(
                func=lambda x: np.maximum(
                    np.interp(x, ramp_nodes, dn, left=dn[0] - supF, right=dn[-1] - supF), -F.func(x)),
                lipschitz=None, name="l",
            )
            return Bracket(lo, u, bound)

        return BracketCover(eps, count, None, assign)

    def sample(self, k, rng):
        """Members ``F(x) * s(x)`` with a random smooth ``|s| <= 1``, scaled to stay in the ball."""
        F = self.envelope
        out = []
        Flip = F.lipschitz if F.lipschitz is not None else 1.0
        supF = F.sup_norm
        for _ in range(k):
            freq = rng.uniform(0.2, 2.0)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(0.3, 1.0)
            # a Lipschitz-lip function bounded by supF is tau-Hoelder with constant
            # lip^tau (2 supF)^(1 - tau)
            lip = amp * (Flip + supF * freq)
            hold = lip**self.tau * (2 * amp * supF) ** (1 - self.tau)
            a = amp * min(1.0, 0.9 * self.L / hold) ** (1.0 / self.tau)
            out.append(RealFunction(
                func=lambda x, a=a, w=freq, p=phase: a * F.func(x) * np.sin(w * x + p),
                support=F.support, name="ball-member",
            ))
        return out


def bracket_cover(cls: FunctionClass, epsilon: float) -> BracketCover:
    """Continuous epsilon-brackets covering ``cls``; see the class's ``brackets``."""
    return cls.brackets(epsilon)
