"""Linear processes, their partial sums, norming sequences and the LFSM limit."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal

from .errors import ConfigurationError, DomainError, SpecError
from .innovations import (
    InnovationModel,
    NormingSequence,
    calibrate_norming,
    sample_innovations,
    stable_draws,
)

__all__ = [
    "FFT_CROSSOVER",
    "NormingConstants",
    "PathBundle",
    "ProcessSpec",
    "build_path",
    "coefficients",
    "norming",
    "norming_constants",
    "partial_sums",
    "simulate_lfsm",
    "truncation_sensitivity",
]

# direct convolution below this many multiply-adds, FFT above
FFT_CROSSOVER = 1 << 20

CASES = ("a", "b", "c")


@dataclass(frozen=True)
class ProcessSpec:
    """Coefficient law of ``v_t = sum_k phi_k eps_{t-k}``.

    ``case`` is ``"a"`` (short memory, explicit summable ``phi``), ``"b"``
    (long memory, ``H > 1/alpha``) or ``"c"`` (anti-persistent,
    ``H < 1/alpha``, coefficients summing to zero).  In cases b/c the tail is
    ``phi_k ~ k^(H - 1 - 1/alpha) pi_k`` with
    ``pi_k = pi_const * log(e + k) ** pi_log_power``.
    """

    case: str = "a"
    alpha: float = 2.0
    H: float | None = None
    phi: tuple = (1.0,)
    pi_const: float = 1.0
    pi_log_power: float = 0.0
    K: int | None = None

    def __post_init__(self):
        if self.phi is not None:
            object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))
        if self.case == "a" and self.H is None:
            object.__setattr__(self, "H", 1.0 / self.alpha)
        problems = self.problems()
        if problems:
            raise SpecError(problems)

    def problems(self) -> list[str]:
        out = []
        a = self.alpha
        if self.case not in CASES:
            return [f"case must be one of {CASES}, got {self.case!r}"]
        if not (0.0 < a <= 2.0):
            out.append(f"alpha must lie in (0, 2], got {a}")
            return out
        if self.K is not None and self.K < 1:
            out.append(f"truncation K must be >= 1, got {self.K}")
        if self.case == "a":
            if not (1.0 < a <= 2.0):
                out.append(f"case (a) requires alpha in (1, 2], got {a}")
            if not self.phi:
                out.append("case (a) requires a non-empty coefficient list")
            elif not all(math.isfinite(p) for p in self.phi):
                out.append("case (a) coefficients must be finite")
            elif math.fsum(self.phi) == 0.0:
                out.append("case (a) requires sum(phi) != 0")
            return out
        H = self.H
        if H is None or not (0.0 < H < 1.0):
            out.append(f"cases (b), (c) require H in (0, 1), got {H}")
            return out
        if self.case == "b" and not H > 1.0 / a:
            out.append(f"case (b) requires H > 1/alpha = {1.0 / a:.6g}, got H = {H}")
        if self.case == "c" and not H < 1.0 / a:
            out.append(f"case (c) requires H < 1/alpha = {1.0 / a:.6g}, got H = {H}")
        if not self.pi_const > 0:
            out.append("pi_const must be > 0")
        return out

    def pi(self, k):
        k = np.asarray(k, dtype=float)
        return self.pi_const * np.log(math.e + k) ** self.pi_log_power

    def default_K(self, n: int) -> int:
        if self.K is not None:
            return self.K
        if self.case == "a":
            return max(1, len(self.phi) - 1)
        return max(1, n)

    def tail_multiplier(self, K: int) -> float:
        """Constant multiplying ``k^(H-1-1/alpha) pi_k`` in the realized tail.

        1 in case (b).  In case (c) the tail weights are renormalized to sum
        to one at horizon ``K``, which divides them by
        ``Z_K = sum_{j<=K} j^(H-1-1/alpha) pi_j``.
        """
        if self.case != "c":
            return 1.0
        j = np.arange(1, K + 1, dtype=float)
        return 1.0 / math.fsum(j ** (self.H - 1.0 - 1.0 / self.alpha) * self.pi(j))


def coefficients(spec: ProcessSpec, K: int) -> np.ndarray:
    """Coefficients ``phi_0 .. phi_K`` of the truncated filter."""
    if K < 1:
        raise SpecError(f"truncation K must be >= 1, got {K}")
    if spec.case == "a":
        phi = np.zeros(K + 1)
        given = np.asarray(spec.phi, dtype=float)
        if given.size > K + 1:
            if np.any(given[K + 1:] != 0):
                raise SpecError(f"K = {K} drops non-zero case (a) coefficients")
            given = given[: K + 1]
        phi[: given.size] = given
        return phi
    k = np.arange(1, K + 1, dtype=float)
    tail = k ** (spec.H - 1.0 - 1.0 / spec.alpha) * spec.pi(k)
    phi = np.empty(K + 1)
    phi[0] = 1.0
    if spec.case == "b":
        phi[1:] = tail
    else:
        phi[1:] = -tail / math.fsum(tail)
    return phi


@dataclass(frozen=True)
class NormingConstants:
    """The sequences ``c_k``, ``d_k = k^(1/alpha) |c_k| rho_k`` and ``e_k = k / d_k``."""

    spec: ProcessSpec
    rho: NormingSequence
    K: int | None = None

    def c(self, k):
        k = np.asarray(k, dtype=float)
        spec = self.spec
        if np.any(k < 0):
            raise DomainError("c_k needs k >= 0")
        if spec.case == "a":
            out = np.full(k.shape, math.fsum(spec.phi))
        else:
            a = spec.alpha
            K = self.K if self.K is not None else spec.K
            mult = spec.tail_multiplier(K if K is not None else int(max(np.max(k), 1)))
            with np.errstate(divide="ignore"):
                out = mult * k ** (spec.H - 1.0 / a) * spec.pi(k) / abs(spec.H - 1.0 / a)
        out = np.where(k == 0, 1.0, out)
        return out if out.ndim else float(out)

    def d(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(k < 1):
            raise DomainError("d_k and e_k need k >= 1")
        out = k ** (1.0 / self.spec.alpha) * np.abs(self.c(k)) * self.rho(k)
        return out if np.ndim(out) else float(out)

    def e(self, k):
        k = np.asarray(k, dtype=float)
        out = k / self.d(k)
        return out if np.ndim(out) else float(out)


def norming_constants(spec: ProcessSpec, rho: NormingSequence | None = None, K=None) -> NormingConstants:
    return NormingConstants(spec, rho if rho is not None else NormingSequence(), K)


def norming(spec: ProcessSpec, rho: NormingSequence, k: int):
    """Return ``(c_k, d_k, e_k)``; ``k = 0`` raises :class:`DomainError`."""
    nc = NormingConstants(spec, rho)
    return nc.c(k), nc.d(k), nc.e(k)


@dataclass(frozen=True, eq=False)
class PathBundle:
    """A simulated trajectory.

    ``eps`` holds ``eps_{1-K} .. eps_n`` (pre-sample first); ``v`` and ``x``
    hold ``t = 1 .. n``, with ``x_0 = 0`` implicit.
    """

    x: np.ndarray
    d_n: float
    e_n: float
    v: np.ndarray | None = None
    eps: np.ndarray | None = None
    phi: np.ndarray | None = None
    spec: ProcessSpec | None = None
    rho: NormingSequence | None = None
    seed: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def K(self) -> int:
        return 0 if self.phi is None else self.phi.shape[0] - 1

    @classmethod
    def from_path(cls, x, d_n: float, e_n: float) -> "PathBundle":
        """Wrap a fixed trajectory, e.g. for hand-checked examples."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ConfigurationError("x must be a non-empty 1-d array")
        if not (d_n > 0 and e_n > 0):
            raise ConfigurationError("d_n and e_n must be > 0")
        return cls(x=x, d_n=float(d_n), e_n=float(e_n), v=np.diff(x, prepend=0.0))

    def prefix(self, m: int) -> "PathBundle":
        """The first ``m`` observations, renormed at ``m``."""
        if not (1 <= m <= self.n):
            raise DomainError(f"prefix length must be in [1, {self.n}], got {m}")
        if self.spec is None:
            raise ConfigurationError("prefix needs the generating spec for re-norming")
        nc = NormingConstants(self.spec, self.rho or NormingSequence(), self.K or None)
        eps = None if self.eps is None else self.eps[: self.K + m]
        return replace(
            self,
            x=self.x[:m],
            v=None if self.v is None else self.v[:m],
            eps=eps,
            d_n=nc.d(m),
            e_n=nc.e(m),
        )

    def to_csv(self, path, header_comment: str | None = None) -> None:
        """Columns ``t, eps, v, x`` for ``t = 1 .. n``."""
        eps = self.eps[self.K:] if self.eps is not None else np.full(self.n, np.nan)
        v = self.v if self.v is not None else np.full(self.n, np.nan)
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["t", "eps", "v", "x"])
            for t in range(self.n):
                w.writerow([t + 1, repr(float(eps[t])), repr(float(v[t])), repr(float(self.x[t]))])


def _filter(eps_full: np.ndarray, phi: np.ndarray, method: str) -> np.ndarray:
    n = eps_full.size - phi.size + 1
    if method == "auto":
        method = "fft" if n * phi.size > FFT_CROSSOVER else "direct"
    if method == "direct":
        return np.convolve(eps_full, phi, mode="valid")
    if method == "fft":
        return signal.fftconvolve(eps_full, phi, mode="valid")
    raise ConfigurationError(f"unknown convolution method {method!r}")


def build_path(
    spec: ProcessSpec,
    eps_full,
    rho: NormingSequence | None = None,
    K: int | None = None,
    method: str = "auto",
    seed=None,
) -> PathBundle:
    """Filter given innovations ``eps_{1-K} .. eps_n`` into a :class:`PathBundle`."""
    eps_full = np.asarray(eps_full, dtype=float)
    if K is None:
        K = spec.default_K(max(1, eps_full.size - 1))
    if K < 1:
        raise SpecError(f"truncation K must be >= 1, got {K}")
    n = eps_full.size - K
    if n < 1:
        raise ConfigurationError(f"need more than K = {K} innovations, got {eps_full.size}")
    phi = coefficients(spec, K)
    v = _filter(eps_full, phi, method)
    x = np.cumsum(v)
    rho = rho if rho is not None else NormingSequence()
    nc = NormingConstants(spec, rho, K)
    return PathBundle(
        x=x, v=v, eps=eps_full, phi=phi, d_n=nc.d(n), e_n=nc.e(n),
        spec=spec, rho=rho, seed=seed,
    )


def partial_sums(
    spec: ProcessSpec,
    model: InnovationModel,
    n: int,
    K: int | None = None,
    seed=None,
    method: str = "auto",
) -> PathBundle:
    """Simulate ``x_1 .. x_n`` with explicitly drawn pre-sample innovations."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if spec.alpha != model.alpha:
        raise ConfigurationError(
            f"spec alpha {spec.alpha} differs from innovation alpha {model.alpha}"
        )
    K = spec.default_K(n) if K is None else K
    if K < 1:
        raise SpecError(f"truncation K must be >= 1, got {K}")
    eps = sample_innovations(model, n + K, seed)
    return build_path(spec, eps, calibrate_norming(model), K, method, seed)


def _lfsm_kernels(H, alpha, m, T, M):
    width = 1.0 / (m * M)
    n_fwd = m * M
    n_past = max(1, int(math.ceil(T / width)))
    expo = H - 1.0 / alpha
    r = np.arange(1, m + 1) / m
    s_fwd = (np.arange(n_fwd) + 0.5) * width
    s_past = -(np.arange(n_past) + 0.5) * width
    diff = r[:, None] - s_fwd[None, :]
    if expo == 0.0:
        k_fwd = (diff > 0).astype(float)
        k_past = None
    else:
        k_fwd = np.where(diff > 0, np.abs(diff) ** expo, 0.0)
        k_past = (r[:, None] - s_past[None, :]) ** expo - (-s_past[None, :]) ** expo
    return width, k_fwd, k_past


def simulate_lfsm(
    H: float,
    alpha: float,
    m: int,
    T: float,
    M: int,
    seed=None,
    n_paths: int | None = None,
    skew: float = 0.0,
    chunk: int = 256,
) -> np.ndarray:
    """Riemann-sum sample of the linear fractional stable motion on ``r_j = j/m``.

    The driving motion has unit scale (Brownian variance 2 at ``alpha = 2``).
    Cells of width ``1/(m M)`` cover ``[-T, 1]``; kernels are evaluated at
    cell midpoints.  Increments on ``[0, 1]`` are drawn before those of the
    past, so for fixed ``m * M`` they do not depend on ``T``.

    Returns ``X(r_0), .., X(r_m)`` with ``X(0) = 0``, or an array of shape
    ``(n_paths, m + 1)``.
    """
    if m < 1 or M < 1:
        raise ConfigurationError("grid m and mesh M must be >= 1")
    if not T > 0:
        raise ConfigurationError(f"truncation T must be > 0, got {T}")
    if not 0.0 < H < 1.0:
        raise ConfigurationError(f"H must lie in (0, 1), got {H}")
    if not 0.0 < alpha <= 2.0:
        raise ConfigurationError(f"alpha must lie in (0, 2], got {alpha}")
    rng = np.random.default_rng(seed)
    width, k_fwd, k_past = _lfsm_kernels(H, alpha, m, T, M)
    n_fwd = k_fwd.shape[1]
    n_past = 0 if k_past is None else k_past.shape[1]
    scale = width ** (1.0 / alpha)
    count = 1 if n_paths is None else n_paths

    def draw(size):
        if alpha == 2.0:
            return math.sqrt(2.0) * rng.standard_normal(size)
        return stable_draws(alpha, skew, size, rng)

    out = np.zeros((count, m + 1))
    for start in range(0, count, chunk):
        stop = min(count, start + chunk)
        fwd = np.empty((stop - start, n_fwd))
        past = np.empty((stop - start, n_past)) if n_past else None
        for i in range(stop - start):
            fwd[i] = draw(n_fwd)
            # past increments are drawn even when H = 1/alpha so that the
            # stream is the same for every H
            p = draw(max(1, int(math.ceil(T / width))))
            if past is not None:
                past[i] = p
        X = scale * (fwd @ k_fwd.T)
        if past is not None:
            X += scale * (past @ k_past.T)
        out[start:stop, 1:] = X
    return out[0] if n_paths is None else out


@dataclass(frozen=True)
class TruncationReport:
    """Effect of the past-integral cutoff ``T`` on ``X(1)``."""

    T: np.ndarray
    var_X1: np.ndarray
    mean_abs_shift: np.ndarray  # E|X_T(1) - X_Tmax(1)| on common forward noise


def truncation_sensitivity(H: float, alpha: float, T_values, m: int = 32, M: int = 4,
                           replications: int = 500, seed: int = 0) -> TruncationReport:
    """Re-simulate ``X(1)`` under each cutoff in ``T_values``.

    Replication ``r`` reuses ``SeedSequence(seed, spawn_key=(r,))`` for every
    ``T``, so the increments on ``[0, 1]`` are shared and differences isolate
    the truncated past.  No rate in ``T`` is asserted.
    """
    T = np.sort(np.asarray(T_values, dtype=float))
    if T.size < 2:
        raise ConfigurationError("need at least two truncation values")
    X1 = np.empty((replications, T.size))
    for r in range(replications):
        ss = np.random.SeedSequence(seed, spawn_key=(r,))
        for j, t in enumerate(T):
            X1[r, j] = simulate_lfsm(H, alpha, m, float(t), M, seed=ss)[-1]
    shift = np.mean(np.abs(X1 - X1[:, -1:]), axis=0)
    return TruncationReport(T, X1.var(axis=0, ddof=1), shift)
