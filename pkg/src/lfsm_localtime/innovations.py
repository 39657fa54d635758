"""I.i.d. innovations attracted to a strictly stable law.

All families are scaled so that the limiting stable motion has unit scale
(``c = 1``): its increments over ``[r1, r2]`` have log characteristic
function ``-(r2 - r1) |lam|^alpha [1 + i skew sgn(lam) tan(pi alpha / 2)]``.
In particular the Gaussian family has variance 2, not 1.

Exact stable draws use the Chambers-Mallows-Stuck transform.  Note that the
skew sign convention above is the opposite of Samorodnitsky-Taqqu's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigurationError, UnsupportedFamilyError

__all__ = [
    "FAMILIES",
    "InnovationModel",
    "NormingSequence",
    "calibrate_norming",
    "char_fn",
    "sample_innovations",
    "stable_draws",
]

FAMILIES = ("exact-stable", "gaussian", "student-t", "two-point")

_DEFAULT_SCALE = {
    "exact-stable": 1.0,
    "gaussian": math.sqrt(2.0),
    "student-t": 1.0,
    "two-point": 1.0,
}


@dataclass(frozen=True)
class InnovationModel:
    """Law of the driving innovations.

    Parameters
    ----------
    alpha : float
        Stability index in ``(0, 2]``.
    skew : float
        Skewness in ``[-1, 1]``; must be 0 when ``alpha == 1``.
    family : str
        One of :data:`FAMILIES`.
    df : float, optional
        Degrees of freedom for ``student-t``.  ``df > 2`` is attracted to the
        Gaussian law (``alpha = 2``); ``df < 2`` requires ``alpha == df``.
    scale_cal : float, optional
        Multiplier applied to raw draws.  Defaults to the value that makes
        the norming sequence identically 1 for ``exact-stable`` and
        ``gaussian``, and to 1 otherwise.
    """

    alpha: float = 2.0
    skew: float = 0.0
    family: str = "gaussian"
    df: float | None = None
    scale_cal: float | None = None

    def __post_init__(self):
        if self.scale_cal is None and self.family in _DEFAULT_SCALE:
            object.__setattr__(self, "scale_cal", _DEFAULT_SCALE[self.family])
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> list[str]:
        out = []
        a, b = self.alpha, self.skew
        if self.family not in FAMILIES:
            out.append(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not (0.0 < a <= 2.0):
            out.append(f"alpha must lie in (0, 2], got {a}")
        if not (-1.0 <= b <= 1.0):
            out.append(f"skew must lie in [-1, 1], got {b}")
        if a == 1.0 and b != 0.0:
            out.append("skew must be 0 when alpha == 1")
        if self.scale_cal is None or not self.scale_cal > 0:
            out.append(f"scale_cal must be > 0, got {self.scale_cal}")
        if self.family == "gaussian" and a != 2.0:
            out.append("gaussian family requires alpha == 2")
        if self.family in ("gaussian", "two-point", "student-t") and b != 0.0:
            out.append(f"{self.family} family is symmetric: skew must be 0")
        if self.family == "two-point" and a != 2.0:
            out.append("two-point family requires alpha == 2")
        if self.family == "student-t":
            df = self.df
            if df is None or df <= 0:
                out.append("student-t family requires df > 0")
            elif df > 2 and a != 2.0:
                out.append("student-t with df > 2 requires alpha == 2")
            elif df < 2 and a != df:
                out.append("student-t with df < 2 requires alpha == df")
            elif df == 2:
                out.append("student-t with df == 2 needs a logarithmic norming; unsupported")
        return out


@dataclass(frozen=True)
class NormingSequence:
    """Slowly varying sequence ``rho_k = constant * log(e + k) ** log_power``."""

    constant: float = 1.0
    log_power: float = 0.0

    def __post_init__(self):
        if not self.constant > 0:
            raise ConfigurationError(f"norming constant must be > 0, got {self.constant}")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        out = self.constant * np.log(math.e + k) ** self.log_power
        return out if out.ndim else float(out)


def stable_draws(alpha: float, skew: float, size, rng: np.random.Generator) -> np.ndarray:
    """Unit-scale strictly stable draws, cf ``exp(-|l|^a [1 + i b sgn(l) tan(pi a/2)])``."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.exponential(1.0, size)
    if alpha == 1.0:
        return np.tan(v)
    st_beta = -skew  # Samorodnitsky-Taqqu sign
    t = st_beta * math.tan(math.pi * alpha / 2)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2 * alpha))
    return (
        s
        * np.sin(alpha * (v + b))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
    )


def _raw_draws(model: InnovationModel, size, rng: np.random.Generator) -> np.ndarray:
    fam = model.family
    if fam == "exact-stable":
        return stable_draws(model.alpha, model.skew, size, rng)
    if fam == "gaussian":
        return rng.standard_normal(size)
    if fam == "student-t":
        return rng.standard_t(model.df, size)
    return rng.choice(np.array([-1.0, 1.0]), size=size)


def sample_innovations(model: InnovationModel, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. innovations; identical ``(model, n, seed)`` give identical output."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return model.scale_cal * _raw_draws(model, n, rng)


def _student_t_cf(u, df):
    z = np.sqrt(df) * np.abs(u)
    out = np.ones_like(z)
    nz = z > 0
    zz = z[nz]
    out[nz] = special.kv(df / 2, zz) * zz ** (df / 2) / (special.gamma(df / 2) * 2 ** (df / 2 - 1))
    # kv underflows to 0 far out; the cf is then below 1e-300 anyway
    return np.nan_to_num(out, nan=0.0)


def char_fn(model: InnovationModel, lam):
    """Characteristic function ``E exp(i lam eps)`` of a scaled innovation.

    Vectorized over ``lam``; returns complex values.
    """
    lam = np.asarray(lam, dtype=float)
    u = model.scale_cal * lam
    fam = model.family
    if fam == "exact-stable":
        a = model.alpha
        mag = np.abs(u) ** a
        if model.skew == 0.0 or a == 1.0:
            out = np.exp(-mag).astype(complex)
        else:
            phase = model.skew * np.sign(u) * math.tan(math.pi * a / 2)
            out = np.exp(-mag * (1.0 + 1j * phase))
    elif fam == "gaussian":
        out = np.exp(-0.5 * u * u).astype(complex)
    elif fam == "student-t":
        out = _student_t_cf(u, model.df).astype(complex)
    elif fam == "two-point":
        out = np.cos(u).astype(complex)
    else:  # pragma: no cover - guarded by validation
        raise UnsupportedFamilyError(fam)
    return out if out.ndim else complex(out)


def cf_decays(model: InnovationModel) -> bool:
    """Whether ``|psi(lam)| -> 0`` as ``|lam| -> inf`` (integrable products exist)."""
    return model.family != "two-point"


def _stable_tail_constant(alpha: float) -> float:
    # C_alpha such that P(|X| > x) ~ C_alpha sigma^alpha x^-alpha for S_alpha(sigma)
    if alpha == 1.0:
        return 2.0 / math.pi
    return (1.0 - alpha) / (math.gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2))


def calibrate_norming(model: InnovationModel, log_power: float = 0.0) -> NormingSequence:
    """Norming sequence making ``(k^(1/alpha) rho_k)^-1 sum eps`` converge with ``c = 1``.

    ``log_power`` switches on a logarithmic slowly varying factor; it is
    not part of any limit calculation and only exists for sensitivity runs.
    """
    s = model.scale_cal
    fam = model.family
    if fam == "exact-stable":
        const = s
    elif fam == "gaussian":
        const = s / math.sqrt(2.0)
    elif fam == "two-point":
        const = s / math.sqrt(2.0)
    else:
        df = model.df
        if df > 2:
            const = s * math.sqrt(df / (df - 2) / 2.0)
        else:
            dens = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))
            tail = 2.0 * dens * df ** ((df + 1) / 2) / df
            const = s * (tail / _stable_tail_constant(df)) ** (1.0 / df)
    return NormingSequence(constant=const, log_power=log_power)

