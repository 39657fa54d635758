"""Zero-energy sums, conditional expectations by Fourier inversion, and the
telescoping martingale decomposition of ``S_n f``.

For a linear process ``x_s = sum_j w_{s,j} eps_j`` the unrevealed part of
``x_{t+k}`` given ``eps_{<=t}`` is ``sum_{m<k} a_m eps_{t+k-m}`` with
``a_m = phi_0 + ... + phi_m``, so

    E_t f(x_{t+k}) = (2 pi)^-1 int fhat(lam) exp(-i lam y) prod_{m<k} psi(-lam a_m) dlam

where ``y`` is the revealed part.  Integrals use composite Gauss-Legendre
rules on ``[-Lam, Lam]``; the error is estimated by comparing two orders.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import (
    DomainError,
    IntegrabilityError,
    OutOfScopeError,
    QuadratureError,
    ResourceError,
    StatisticalPowerError,
    UnsupportedFamilyError,
    ZeroEnergyViolation,
)
from .function_space import FunctionClass, FiniteClass, ParametricClass, RealFunction, beta_norm
from .innovations import InnovationModel, NormingSequence, cf_decays, char_fn
from .linear_process import NormingConstants, PathBundle, ProcessSpec, coefficients
from .local_time import beta_bar

__all__ = [
    "DeltaReport",
    "coefficient_k0",
    "fit_gamma1",
    "MartingaleDecomposition",
    "ZERO_ENERGY_GATE",
    "conditional_expectation",
    "delta_n",
    "innovation_pdf",
    "martingale_decomposition",
    "orlicz_moment_proxy",
    "quadratic_variation",
    "smoothed_expectation",
    "sum_zero_energy",
]

ZERO_ENERGY_GATE = 1e-10


def sum_zero_energy(path, g: RealFunction, override: bool = False) -> float:
    """``S_n g = sum_t g(x_t)`` with compensated summation.

    ``g`` must integrate to zero (within :data:`ZERO_ENERGY_GATE`) unless
    ``override`` is set.
    """
    if not override and abs(g.integral) > ZERO_ENERGY_GATE:
        raise ZeroEnergyViolation(f"int g = {g.integral:.3g} is not zero; pass override=True")
    x = path.x if isinstance(path, PathBundle) else np.asarray(path, dtype=float)
    return math.fsum(g(x))


# -- Fourier machinery ------------------------------------------------------------

_GL = {m: np.polynomial.legendre.leggauss(m) for m in (16, 32)}


def _panel_nodes(breaks: np.ndarray, order: int):
    x0, w0 = _GL[order]
    a, b = breaks[:-1, None], breaks[1:, None]
    half = (b - a) / 2
    nodes = (a + b) / 2 + half * x0[None, :]
    weights = half * w0[None, :]
    return nodes.ravel(), weights.ravel()


class _Inversion:
    """``lam -> fhat(lam) prod_m psi(-lam w_m)`` and its quadrature rules."""

    def __init__(self, f: RealFunction, model: InnovationModel, weights, tol: float):
        if f.fhat_closed is None:
            raise DomainError(f"{f.name}: a closed-form Fourier transform is required")
        self.f = f
        self.model = model
        self.w = np.asarray(weights, dtype=float)
        self.tol = tol
        if not cf_decays(model) and not math.isinf(f.fhat_decay):
            raise IntegrabilityError(
                f"{model.family} characteristic function does not decay; "
                f"fhat of {f.name} decays only like |lam|^-{f.fhat_decay:g}",
                min_k=None,
            )
        self.cutoff = self._cutoff()

    def G(self, lam):
        out = np.asarray(self.f.fhat(lam), dtype=complex)
        for wm in self.w:
            if wm != 0.0:
                out = out * char_fn(self.model, -lam * wm)
        return out

    def _cutoff(self) -> float:
        lam = np.logspace(-3, 7, 4001)
        mag = np.abs(self.G(lam)) + np.abs(self.G(-lam))
        seg = np.diff(lam) * (mag[1:] + mag[:-1]) / 2
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        if tail[-2] > self.tol:
            raise IntegrabilityError(
                f"product transform not integrable to tolerance {self.tol:g} "
                f"(tail beyond 1e7 is {tail[-2]:.3g}); use a longer horizon",
                min_k=None,
            )
        ok = np.nonzero(tail < self.tol * 1e-2)[0]
        return float(lam[ok[0]]) if ok.size else float(lam[-1])

    def breaks(self, freq: float, refine: int = 0) -> np.ndarray:
        """Panel edges on ``[0, Lam]`` (mirrored), graded towards 0."""
        L = self.cutoff
        width = min(L / 8, 2.0 / max(freq, 1e-12), 1.0) / 2**refine
        m = int(math.ceil(L / width))
        uniform = np.linspace(0.0, L, m + 1)
        # |lam|^alpha cusps at 0 need geometric grading; the Gaussian cf is smooth
        levels = 0 if self.model.family == "gaussian" else 16
        grade = uniform[1] * 2.0 ** -np.arange(1, levels + 1)
        pos = np.concatenate([[0.0], grade[::-1], uniform[1:]])
        return np.concatenate([-pos[:0:-1], pos])

    def rule(self, freq: float, order: int, refine: int = 0):
        lam, wts = _panel_nodes(self.breaks(freq, refine), order)
        return lam, wts

    def expect(self, y) -> tuple[np.ndarray, float]:
        """``(2 pi)^-1 int G(lam) exp(-i lam y) dlam`` for each ``y`` and an error estimate."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        freq = max(1.0, float(np.max(np.abs(y))) if y.size else 1.0)
        for refine in range(6):
            vals = []
            for order in (16, 32):
                lam, wts = self.rule(freq, order, refine)
                u = wts * self.G(lam)
                vals.append(np.real(np.exp(-1j * np.outer(y, lam)) @ u) / (2 * np.pi))
            err = float(np.max(np.abs(vals[0] - vals[1]))) if y.size else 0.0
            if err <= self.tol:
                return vals[1], err
        raise QuadratureError(f"inversion did not reach tolerance {self.tol:g} (last error {err:.3g})")

    def conditional_variance(self, y, a: float) -> tuple[np.ndarray, np.ndarray, float]:
        """``Var h(y + a eps)`` and ``E h(y + a eps)`` where ``h = (2pi)^-1 int G e^{-i lam .}``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        freq = max(1.0, float(np.max(np.abs(y))) if y.size else 1.0, abs(a) * self.model.scale_cal)
        for refine in range(4):
            res = []
            for order in (16, 32):
                lam, wts = self.rule(freq, order, refine)
                keep = np.abs(self.G(lam)) * wts > self.tol * 1e-6
                lam, wts = lam[keep], wts[keep]
                u = (wts * self.G(lam))[None, :] * np.exp(-1j * np.outer(y, lam))
                Q = char_fn(self.model, -(lam[:, None] + lam[None, :]) * a)
                second = np.real(np.sum((u @ Q) * u, axis=1)) / (4 * np.pi**2)
                first = np.real(u @ char_fn(self.model, -lam * a)) / (2 * np.pi)
                res.append((second - first**2, first))
            err = float(np.max(np.abs(res[0][0] - res[1][0]))) if y.size else 0.0
            if err <= max(self.tol, 1e-9):
                return np.maximum(res[1][0], 0.0), res[1][1], err
        raise QuadratureError(f"double inversion did not reach tolerance (last error {err:.3g})")


def smoothed_expectation(f: RealFunction, model: InnovationModel, weights, y=0.0, tol: float = 1e-10):
    """``E f(y + sum_m weights_m eps_m)`` for i.i.d. innovations ``eps_m``."""
    vals, _ = _Inversion(f, model, weights, tol).expect(y)
    return vals if np.ndim(y) else float(vals[0])


def _partial_a(phi: np.ndarray, length: int) -> np.ndarray:
    a = np.cumsum(phi)
    if length > a.size:
        a = np.concatenate([a, np.full(length - a.size, a[-1])])
    return a[:length]


def conditional_expectation(
    f: RealFunction,
    model: InnovationModel,
    spec: ProcessSpec,
    eps_past,
    k: int,
    K: int | None = None,
    tol: float = 1e-10,
) -> float:
    """``E_t f(x_{t+k})`` given ``eps_past = (eps_{1-K}, ..., eps_t)``.

    ``t = len(eps_past) - K``; ``t = 0`` conditions on the pre-sample only.
    """
    if k < 1:
        raise DomainError(f"horizon k must be >= 1, got {k}")
    eps_past = np.asarray(eps_past, dtype=float)
    if K is None:
        K = spec.default_K(max(1, eps_past.size + k))
    t = eps_past.size - K
    if t < 0:
        raise DomainError(f"need at least K = {K} pre-sample innovations")
    phi = coefficients(spec, K)
    a = _partial_a(phi, t + k + K + 1)
    j = np.arange(1 - K, t + 1)
    w = a[t + k - j] - np.where(j <= 0, a[np.maximum(-j, 0)], 0.0)
    y = math.fsum(w * eps_past)
    try:
        return smoothed_expectation(f, model, a[:k], y, tol)
    except IntegrabilityError as exc:
        raise IntegrabilityError(str(exc), min_k=_min_horizon(f, model, spec, K, k, tol)) from None


def _min_horizon(f, model, spec, K, k, tol, search: int = 64):
    """Smallest horizon above ``k`` whose product transform is integrable, if any within ``search``."""
    if not cf_decays(model):
        return None
    a = _partial_a(coefficients(spec, K), k + search + 1)
    for kk in range(k + 1, k + search + 1):
        try:
            _Inversion(f, model, a[:kk], tol)
        except IntegrabilityError:
            continue
        return kk
    return None


@dataclass(frozen=True)
class K0Report:
    k0: int | None
    lower: float
    upper: float
    k: np.ndarray
    ratio_min: np.ndarray  # min over floor(k/2) <= l <= k of |a_l| / c_k
    ratio_max: np.ndarray


def coefficient_k0(spec: ProcessSpec, lower: float, upper: float, k_max: int = 2048,
                   rho: NormingSequence | None = None, K: int | None = None) -> K0Report:
    """Smallest ``k0`` with ``lower <= |a_l| / c_k <= upper`` for all
    ``k0 < k <= k_max`` and ``floor(k/2) <= l <= k``.

    ``a_l = phi_0 + ... + phi_l``.  The filter is truncated at ``K``
    (default ``16 k_max``) so that case (c) cancellation at the horizon does
    not reach the window.  ``k0`` is ``None`` when ``k = k_max`` itself fails.
    """
    if not 0 < lower <= upper:
        raise DomainError(f"need 0 < lower <= upper, got {lower}, {upper}")
    if K is None:
        K = spec.default_K(1) if spec.case == "a" else max(16 * k_max, 1 << 20)
    nc = NormingConstants(spec, rho or NormingSequence(), K)
    absa = np.abs(_partial_a(coefficients(spec, K), k_max + 1))
    k = np.arange(1, k_max + 1)
    lo = np.array([absa[kk // 2: kk + 1].min() for kk in k])
    hi = np.array([absa[kk // 2: kk + 1].max() for kk in k])
    c = np.abs(nc.c(k))
    rmin, rmax = lo / c, hi / c
    bad = np.flatnonzero((rmin < lower) | (rmax > upper))
    if bad.size == 0:
        k0 = 0
    elif bad[-1] == k_max - 1:
        k0 = None
    else:
        k0 = int(k[bad[-1]])
    return K0Report(k0, lower, upper, k, rmin, rmax)


@dataclass(frozen=True)
class Gamma1Fit:
    gamma1: float  # fitted exponential rate
    k: np.ndarray
    tail: np.ndarray  # int_{|lam| >= lam0} prod_m |psi(a_m lam)| dlam


def fit_gamma1(model: InnovationModel, spec: ProcessSpec, ks, lam0: float = 1.0,
               K: int | None = None) -> Gamma1Fit:
    """Fit ``tail(k) ~ C exp(-gamma1 k)`` for the high-frequency part of the
    transform of the ``k`` unrevealed innovations.

    The fit is log-linear least squares over ``ks``; it is a descriptive
    estimate, not a certified constant.
    """
    if not cf_decays(model):
        raise IntegrabilityError(f"{model.family} innovations have a non-decaying transform")
    ks = np.asarray(sorted(set(int(k) for k in ks)))
    if ks.size < 3 or ks[0] < 1:
        raise StatisticalPowerError("need >= 3 distinct horizons >= 1")
    K = K if K is not None else spec.default_K(int(ks[-1]))
    a = _partial_a(coefficients(spec, K), int(ks[-1]))
    tail = np.empty(ks.size)
    for i, k in enumerate(ks):
        w = a[:k]

        def mod(lam, w=w):
            return float(np.exp(np.sum(np.log(np.abs(char_fn(model, w * lam)) + 1e-300))))

        tail[i] = 2.0 * integrate.quad(mod, lam0, np.inf, limit=200)[0]
    if np.any(tail <= 0):
        raise QuadratureError("tail integral underflowed; use smaller horizons")
    slope = float(np.polyfit(ks, np.log(tail), 1)[0])
    return Gamma1Fit(-slope, ks, tail)


# -- decomposition ----------------------------------------------------------------

def innovation_pdf(model: InnovationModel):
    """Density of a scaled innovation (``None`` for the two-point law)."""
    s = model.scale_cal
    fam = model.family
    if fam == "gaussian":
        c = 1.0 / (s * math.sqrt(2 * math.pi))
        return lambda z: c * np.exp(-0.5 * (z / s) ** 2)
    if fam == "student-t":
        return lambda z: stats.t.pdf(z / s, model.df) / s
    if fam == "exact-stable":
        dist = stats.levy_stable(model.alpha, -model.skew, scale=s)
        return dist.pdf
    return None


@dataclass(eq=False)
class MartingaleDecomposition:
    """``S_n f = N_n + sum_k M_nk`` with ``xi[k, t-1] = E_t f(x_{t+k}) - E_{t-1} f(x_{t+k})``.

    ``xi`` rows are padded with NaN beyond ``t = n - k``.  ``C[t, s]`` holds
    ``E_t f(x_s)`` for ``t <= s``; ``Y[t, s]`` the revealed part of ``x_s``.
    """

    n: int
    S: float
    N: float
    M: np.ndarray
    xi: np.ndarray
    C: np.ndarray
    Y: np.ndarray
    a: np.ndarray
    quadrature_tol: float
    f: RealFunction
    model: InnovationModel
    tol: float
    U: np.ndarray | None = None
    V: np.ndarray | None = None

    @property
    def residual(self) -> float:
        return self.S - self.N - math.fsum(self.M)

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["k", "t", "xi"])
            for k in range(self.n):
                for t in range(1, self.n - k + 1):
                    w.writerow([k, t, repr(float(self.xi[k, t - 1]))])

    def summary(self) -> dict:
        out = {"n": self.n, "S_n": self.S, "N_n": self.N, "residual": self.residual,
               "quadrature_tol": self.quadrature_tol}
        if self.U is not None:
            out["U"] = self.U.tolist()
        if self.V is not None:
            out["V"] = self.V.tolist()
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def martingale_decomposition(
    path: PathBundle,
    f: RealFunction,
    model: InnovationModel,
    n_max: int = 64,
    tol: float = 1e-10,
) -> MartingaleDecomposition:
    n = path.n
    if n > n_max:
        raise ResourceError(f"n = {n} exceeds n_max = {n_max} (cost grows like n^2 inversions)")
    if model.family not in ("gaussian", "exact-stable", "student-t"):
        raise UnsupportedFamilyError(f"decomposition needs a decaying cf, not {model.family}")
    if path.eps is None or path.phi is None:
        raise DomainError("path must carry its innovations and coefficients")
    K = path.K
    a = _partial_a(path.phi, n + 1)
    eps = path.eps[K:]  # eps_1 .. eps_n
    x = path.x
    # Y[t, s]: part of x_s measurable at time t, for 0 <= t <= s
    Y = np.full((n + 1, n + 1), np.nan)
    for s in range(1, n + 1):
        contrib = a[s - np.arange(1, s + 1)] * eps[:s]  # j = 1..s
        unrevealed = np.concatenate([np.cumsum(contrib[::-1])[::-1], [0.0]])  # sum_{j>t}, t=0..s
        Y[: s + 1, s] = x[s - 1] - unrevealed
    C = np.full((n + 1, n + 1), np.nan)
    fx = f(x)
    C[np.arange(1, n + 1), np.arange(1, n + 1)] = fx
    qtol = 0.0
    for k in range(1, n + 1):
        t = np.arange(0, n - k + 1)
        vals, err = _Inversion(f, model, a[:k], tol).expect(Y[t, t + k])
        C[t, t + k] = vals
        qtol = max(qtol, err)
    xi = np.full((n, n), np.nan)
    for k in range(n):
        t = np.arange(1, n - k + 1)
        xi[k, : t.size] = C[t, t + k] - C[t - 1, t + k]
    M = np.array([math.fsum(xi[k, : n - k]) for k in range(n)])
    N = math.fsum(C[0, 1:])
    return MartingaleDecomposition(
        n=n, S=math.fsum(fx), N=N, M=M, xi=xi, C=C, Y=Y, a=a,
        quadrature_tol=qtol, f=f, model=model, tol=tol,
    )


def _first_step_variance(dec: MartingaleDecomposition) -> np.ndarray:
    """``Var(f(y + a_0 eps))`` at each revealed ``y = Y[t-1, t]``."""
    f, a0 = dec.f, dec.a[0]
    n = dec.n
    if a0 == 0.0:
        return np.zeros(n)
    pdf = innovation_pdf(dec.model)
    out = np.empty(n)
    for t in range(1, n + 1):
        y = dec.Y[t - 1, t]
        g = lambda s: float(f(np.asarray(y + a0 * s))) ** 2 * pdf(s)
        if f.support is not None:
            lo, hi = sorted(((f.support[0] - y) / a0, (f.support[1] - y) / a0))
            pts = sorted((b - y) / a0 for b in f.breakpoints)
            pts = [p for p in pts if lo < p < hi]
            second = integrate.quad(g, lo, hi, points=pts or None, limit=400, epsabs=1e-13)[0]
        else:
            second = integrate.quad(g, -np.inf, np.inf, limit=400, epsabs=1e-13)[0]
        first = dec.C[t - 1, t]
        out[t - 1] = max(second - first * first, 0.0)
    return out


def quadratic_variation(dec: MartingaleDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """``U_nk = sum_t xi_kt^2`` and ``V_nk = sum_t E_{t-1} xi_kt^2`` for ``k = 0..n-1``."""
    n = dec.n
    U = np.array([math.fsum(dec.xi[k, : n - k] ** 2) for k in range(n)])
    V = np.empty(n)
    V[0] = math.fsum(_first_step_variance(dec))
    for k in range(1, n):
        t = np.arange(1, n - k + 1)
        eng = _Inversion(dec.f, dec.model, dec.a[:k], dec.tol)
        var, _, err = eng.conditional_variance(dec.Y[t - 1, t + k], dec.a[k])
        V[k] = math.fsum(var)
        dec.quadrature_tol = max(dec.quadrature_tol, err)
    dec.U, dec.V = U, V
    return U, V


# -- bound functional and moment proxies ----------------------------------------------

@dataclass(frozen=True)
class DeltaReport:
    value: float
    sup_norm: float
    l1_norm: float
    l2_norm: float
    beta_norm: float
    e_n: float
    d_n: float
    envelope: float  # value * log n

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _class_members(cls) -> list[RealFunction]:
    if isinstance(cls, RealFunction):
        return [cls]
    if isinstance(cls, FiniteClass):
        return cls.members
    if isinstance(cls, ParametricClass):
        lo, hi = cls.theta_range
        return [cls.member(t) for t in np.linspace(lo, hi, 65)]
    if isinstance(cls, (list, tuple)):
        return list(cls)
    raise DomainError(f"cannot enumerate norms of {type(cls).__name__}")


def delta_n(beta: float, cls, n: int, spec: ProcessSpec, rho=None) -> DeltaReport:
    """``||F||_inf + e_n^(1/2) (||F||_1 + ||F||_2) + e_n d_n^-beta ||F||_[beta]``.

    Class norms are suprema over members (parametric classes are scanned on
    65 parameter values).
    """
    H = spec.H
    bb = beta_bar(H)
    if not 0 < beta < bb:
        raise OutOfScopeError(
            f"beta = {beta} is outside (0, {bb:g}); the modified bound for larger beta is not implemented"
        )
    members = _class_members(cls)
    nc = NormingConstants(spec, rho if rho is not None else NormingSequence())
    e, d = float(nc.e(n)), float(nc.d(n))
    sup = max(m.sup_norm for m in members)
    l1 = max(m.l1_norm for m in members)
    l2 = max(m.l2_norm for m in members)
    bn = max(beta_norm(m, beta).value for m in members)
    val = sup + math.sqrt(e) * (l1 + l2) + e * d**-beta * bn
    return DeltaReport(val, sup, l1, l2, bn, e, d, val * math.log(n))


def orlicz_moment_proxy(samples, kind: str = "tau1", min_samples: int = 1000) -> float:
    """Largest normalized moment over ``p = 1..4``.

    ``tau1``: ``||Z||_p / p!^(1/p)``; ``tau23``: ``||Z||_{2p} / (3p)!^(1/(2p))``.
    """
    z = np.abs(np.asarray(samples, dtype=float))
    if z.size < min_samples:
        raise StatisticalPowerError(f"need >= {min_samples} samples, got {z.size}")
    out = 0.0
    for p in range(1, 5):
        if kind == "tau1":
            q, norm = p, special.factorial(p) ** (1.0 / p)
        elif kind == "tau23":
            q, norm = 2 * p, special.factorial(3 * p) ** (1.0 / (2 * p))
        else:
            raise DomainError(f"kind must be 'tau1' or 'tau23', got {kind!r}")
        out = max(out, float(np.mean(z**q)) ** (1.0 / q) / norm)
    return out
