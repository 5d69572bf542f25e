"""Probability distributions and special functions.

The normal CDF is evaluated through a kernel that depends only on ``|x|``,
so that ``Phi(x) + Phi(-x) == 1`` holds to the last bit that the floating
point representation allows.  Chi-square quantities are built on the
regularized incomplete gamma function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, special

from .exceptions import ConstructionError, DomainError

__all__ = [
    "NormalScale",
    "AlternativeH",
    "NormalH",
    "NormalMixtureH",
    "LogisticH",
    "ContaminationPi",
    "PointMassPi",
    "NormalPi",
    "UniformPi",
    "DiscretePi",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_quantile",
    "chi_square_cdf",
    "chi_square_quantile",
    "noncentral_chi2_cdf",
    "h_cdf",
    "h_sample",
    "pi_sample",
    "pi_expect_g0_shift",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_TAIL_MASS = 1e-12


def _scalar_or_array(values, template):
    if np.ndim(template) == 0:
        return float(values)
    return values


def std_normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return _scalar_or_array(out, x)


def std_normal_cdf(x):
    """Standard normal distribution function.

    Accepts scalars or arrays, including ``+-inf``.  The upper tail
    ``0.5 * erfc(|x| / sqrt(2))`` is computed once and reflected, which keeps
    the value exactly symmetric.
    """
    x = np.asarray(x, dtype=float)
    tail = 0.5 * special.erfc(np.abs(x) * _INV_SQRT2)
    out = np.where(x >= 0.0, 1.0 - tail, tail)
    return _scalar_or_array(out, x)


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"normal quantile requires 0 < p < 1, got {p!r}")
    # Reflect upper half so that q(p) == -q(1 - p).
    out = np.where(arr <= 0.5, special.ndtri(arr), -special.ndtri(1.0 - arr))
    return _scalar_or_array(out, arr)


def chi_square_cdf(k, x):
    """Central chi-square CDF with ``k`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    out = special.gammainc(0.5 * k, 0.5 * np.maximum(x, 0.0))
    return _scalar_or_array(out, x)


def chi_square_quantile(k: int, p: float) -> float:
    """Quantile of the central chi-square law with ``k`` degrees of freedom."""
    if int(k) != k or k < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {k!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"chi-square quantile requires 0 < p < 1, got {p!r}")
    return 2.0 * float(special.gammaincinv(0.5 * k, p))


def noncentral_chi2_cdf(k: int, lambda2: float, x: float) -> float:
    """Noncentral chi-square CDF by its Poisson mixture representation.

    ``F_k(x, lambda2) = sum_i Pois(i; lambda2 / 2) * F_{k + 2i}(x)``.  Terms are
    summed up to the index beyond which the remaining Poisson mass is below
    ``1e-12``.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {k!r}")
    if lambda2 < 0.0:
        raise DomainError(f"noncentrality must be nonnegative, got {lambda2!r}")
    if x <= 0.0:
        return 0.0
    if lambda2 == 0.0:
        return float(special.gammainc(0.5 * k, 0.5 * x))
    mu = 0.5 * lambda2
    top = int(math.ceil(mu + 10.0 * math.sqrt(mu) + 10.0))
    while special.pdtrc(top, mu) >= _TAIL_MASS:
        top *= 2
    i = np.arange(top + 1, dtype=float)
    log_w = i * math.log(mu) - mu - special.gammaln(i + 1.0)
    terms = np.exp(log_w) * special.gammainc(0.5 * k + i, 0.5 * x)
    return float(min(1.0, terms.sum()))


@dataclass(frozen=True)
class NormalScale:
    """Centered normal law ``Phi(x / theta)``."""

    theta: float

    def __post_init__(self):
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ConstructionError(f"normal scale must be positive, got {self.theta!r}")

    def cdf(self, x):
        return std_normal_cdf(np.asarray(x, dtype=float) / self.theta)


# Alternatives H.  Every family here is centered, symmetric and smooth with a
# bounded second derivative, so all members are admissible by construction.


class AlternativeH:
    """Base class for the admissible alternative components ``H``."""

    def cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError


def _check_scale(name, value):
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
        raise ConstructionError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class NormalH(AlternativeH):
    """``H(x) = Phi(x / sigma)``."""

    sigma: float

    def __post_init__(self):
        _check_scale("sigma", self.sigma)

    def cdf(self, x):
        return std_normal_cdf(np.asarray(x, dtype=float) / self.sigma)

    def pdf(self, x):
        return std_normal_pdf(np.asarray(x, dtype=float) / self.sigma) / self.sigma

    def sample(self, rng, size=None):
        return self.sigma * rng.standard_normal(size)

    def variance(self):
        return self.sigma ** 2


@dataclass(frozen=True)
class NormalMixtureH(AlternativeH):
    """Scale mixture ``w * Phi(x / s1) + (1 - w) * Phi(x / s2)``."""

    weight: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ConstructionError(f"mixture weight must lie in [0, 1], got {self.weight!r}")
        _check_scale("sigma1", self.sigma1)
        _check_scale("sigma2", self.sigma2)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return (self.weight * std_normal_cdf(x / self.sigma1)
                + (1.0 - self.weight) * std_normal_cdf(x / self.sigma2))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return (self.weight * std_normal_pdf(x / self.sigma1) / self.sigma1
                + (1.0 - self.weight) * std_normal_pdf(x / self.sigma2) / self.sigma2)

    def sample(self, rng, size=None):
        pick = rng.random(size) < self.weight
        scale = np.where(pick, self.sigma1, self.sigma2)
        return scale * rng.standard_normal(size)

    def variance(self):
        return self.weight * self.sigma1 ** 2 + (1.0 - self.weight) * self.sigma2 ** 2


@dataclass(frozen=True)
class LogisticH(AlternativeH):
    """Logistic law with scale ``s``: ``H(x) = 1 / (1 + exp(-x / s))``."""

    scale: float

    def __post_init__(self):
        _check_scale("scale", self.scale)

    def cdf(self, x):
        # Reflected like the normal CDF to keep H(-x) = 1 - H(x) exact.
        x = np.asarray(x, dtype=float)
        tail = special.expit(-np.abs(x) / self.scale)
        return np.where(x >= 0.0, 1.0 - tail, tail)

    def pdf(self, x):
        z = np.abs(np.asarray(x, dtype=float)) / self.scale
        e = np.exp(-z)
        return e / (self.scale * (1.0 + e) ** 2)

    def sample(self, rng, size=None):
        return rng.logistic(0.0, self.scale, size)

    def variance(self):
        return (math.pi * self.scale) ** 2 / 3.0


def h_cdf(h: AlternativeH, x):
    """Distribution function of the alternative component."""
    return h.cdf(x)


def h_sample(h: AlternativeH, rng: np.random.Generator, size=None):
    """Draw from the alternative component."""
    return h.sample(rng, size)


# Contamination laws Pi.


class ContaminationPi:
    """Base class for the outlier law of ``xi_t``."""

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def expect_g0_shift(self, theta0: float, x: float, b: float) -> float:
        """``E[Phi((x + b * xi) / theta0)] - Phi(x / theta0)``."""
        raise NotImplementedError


def _g0(theta0, x):
    return std_normal_cdf(x / theta0)


@dataclass(frozen=True)
class PointMassPi(ContaminationPi):
    """Degenerate outlier law at ``c``."""

    c: float

    def sample(self, rng, size=None):
        if size is None:
            return float(self.c)
        return np.full(size, float(self.c))

    def expect_g0_shift(self, theta0, x, b):
        if not math.isfinite(x):
            return 0.0
        return _g0(theta0, x + b * self.c) - _g0(theta0, x)


@dataclass(frozen=True)
class DiscretePi(ContaminationPi):
    """Finite discrete outlier law ``{(value, prob)}``."""

    values: Tuple[float, ...]
    probs: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(q) for q in self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ConstructionError("discrete law needs matching, nonempty values and probs")
        if any(q < 0.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ConstructionError(f"discrete probabilities must be >= 0 and sum to 1, got {probs}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    def sample(self, rng, size=None):
        idx = rng.choice(len(self.values), size=size, p=np.asarray(self.probs))
        out = np.asarray(self.values)[idx]
        return float(out) if size is None else out

    def expect_g0_shift(self, theta0, x, b):
        if not math.isfinite(x):
            return 0.0
        vals = np.asarray(self.values)
        probs = np.asarray(self.probs)
        return float(np.dot(probs, std_normal_cdf((x + b * vals) / theta0))) - _g0(theta0, x)


@dataclass(frozen=True)
class NormalPi(ContaminationPi):
    """Normal outlier law with mean ``mean`` and standard deviation ``scale``."""

    mean: float
    scale: float

    def __post_init__(self):
        _check_scale("scale", self.scale)

    def sample(self, rng, size=None):
        return self.mean + self.scale * rng.standard_normal(size)

    def expect_g0_shift(self, theta0, x, b):
        if not math.isfinite(x):
            return 0.0
        if b == 0.0:
            return 0.0

        def integrand(z):
            return std_normal_cdf((x + b * (self.mean + self.scale * z)) / theta0) * std_normal_pdf(z)

        val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-11, epsrel=1e-10, limit=200)
        return val - _g0(theta0, x)


@dataclass(frozen=True)
class UniformPi(ContaminationPi):
    """Uniform outlier law on ``[low, high]``."""

    low: float
    high: float

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise ConstructionError(f"uniform law needs low < high, got [{self.low}, {self.high}]")

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size)

    def expect_g0_shift(self, theta0, x, b):
        if not math.isfinite(x):
            return 0.0
        if b == 0.0:
            return 0.0
        width = self.high - self.low

        def integrand(s):
            return std_normal_cdf((x + b * s) / theta0)

        val, _ = integrate.quad(integrand, self.low, self.high, epsabs=1e-11, epsrel=1e-10, limit=200)
        return val / width - _g0(theta0, x)


def pi_sample(pi: ContaminationPi, rng: np.random.Generator, size=None):
    """Draw outliers from the contamination law."""
    return pi.sample(rng, size)


def pi_expect_g0_shift(pi: ContaminationPi, g0: NormalScale, x: float, b: float) -> float:
    """``E[Phi((x + b * xi) / theta0)] - Phi(x / theta0)`` for ``xi ~ pi``."""
    return pi.expect_g0_shift(g0.theta, x, b)
