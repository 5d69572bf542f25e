"""Limiting behaviour of the symmetrized Pearson statistic under local
mixture alternatives and sporadic outliers.

Outliers perturb the residual EDF by ``gamma * Delta_0(x, Pi)`` with
``Delta_0(x, Pi) = sum_{j=0}^{p} [E G0(x + beta_j xi) - G0(x)]``,
``beta_0 = -1``.  Only its antisymmetric part ``Delta_S`` survives
symmetrization.  The statistic is asymptotically noncentral chi-square with
``m - 2`` degrees of freedom and noncentrality

    lambda^2 = | Q P0^{-1/2} [rho (p_H - p0) + gamma delta(Pi)] |^2,

where ``Q`` projects out the direction of the scale score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ar_process import ARModelSpec
from .distributions import (
    AlternativeH,
    ContaminationPi,
    NormalScale,
    chi_square_quantile,
    noncentral_chi2_cdf,
)
from .exceptions import DomainError
from .pearson_test import Partition, cell_probs

__all__ = [
    "AsymptoticContext",
    "ShiftVector",
    "delta0",
    "delta_s",
    "shift_vector",
    "ph_vector",
    "p0_vector",
    "pa_vector",
    "noncentrality",
    "asymptotic_power",
    "power_from_lambda2",
    "robustness_bound",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class AsymptoticContext:
    """Null cell geometry for a fixed partition, true scale and AR model."""

    part: Partition
    theta0: NormalScale
    model: ARModelSpec
    p0: np.ndarray
    p0_prime: np.ndarray
    b0: np.ndarray
    alpha0: np.ndarray
    Q: np.ndarray

    @classmethod
    def build(cls, part: Partition, model: ARModelSpec,
              theta0: Optional[NormalScale] = None) -> "AsymptoticContext":
        theta0 = model.theta0 if theta0 is None else theta0
        p0, p0_prime = cell_probs(part, theta0.theta)
        b0 = p0_prime / np.sqrt(p0)
        alpha0 = b0 / np.linalg.norm(b0)
        Q = np.eye(part.m) - np.outer(alpha0, alpha0)
        return cls(part=part, theta0=theta0, model=model, p0=p0, p0_prime=p0_prime,
                   b0=b0, alpha0=alpha0, Q=Q)

    @property
    def m(self) -> int:
        return self.part.m

    @property
    def weighted_projector(self) -> np.ndarray:
        """``Q P0^{-1/2}``."""
        return self.Q / np.sqrt(self.p0)[None, :]

    @property
    def limit_covariance(self) -> np.ndarray:
        """``P0 - p0 p0^T``, the covariance of the normalized oracle counts."""
        return np.diag(self.p0) - np.outer(self.p0, self.p0)


@dataclass(frozen=True)
class ShiftVector:
    """Cell-wise outlier drift ``delta_j = 2 [Delta_S(x_j) - Delta_S(x_{j-1})]``."""

    delta: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.delta))


def delta0(x: float, pi: ContaminationPi, ctx: AsymptoticContext) -> float:
    """Outlier-induced shift of the residual EDF at ``x`` (per unit ``gamma``)."""
    if not math.isfinite(x):
        return 0.0
    theta = ctx.theta0.theta
    return float(sum(pi.expect_g0_shift(theta, x, b) for b in ctx.model.coefficients))


def delta_s(x: float, pi: ContaminationPi, ctx: AsymptoticContext) -> float:
    """Antisymmetric part ``(Delta_0(x) - Delta_0(-x)) / 2``."""
    if x == 0.0:
        return 0.0
    return 0.5 * (delta0(x, pi, ctx) - delta0(-x, pi, ctx))


def shift_vector(pi: ContaminationPi, ctx: AsymptoticContext) -> ShiftVector:
    """Drift of the pooled cell frequencies caused by outliers."""
    ds = np.array([0.0] + [delta_s(x, pi, ctx) for x in ctx.part.finite] + [0.0])
    return ShiftVector(delta=2.0 * np.diff(ds))


def p0_vector(ctx: AsymptoticContext) -> np.ndarray:
    return ctx.p0.copy()


def ph_vector(h: AlternativeH, ctx: AsymptoticContext) -> np.ndarray:
    """``p_j^H = 2 (H(x_j) - H(x_{j-1}))`` with ``H(x_m) = 1``."""
    upper = np.concatenate((np.asarray(h.cdf(ctx.part.finite), dtype=float), [1.0]))
    lower = np.concatenate(([0.5], upper[:-1]))
    return 2.0 * (upper - lower)


def pa_vector(h: AlternativeH, n: int, rho: float, ctx: AsymptoticContext) -> np.ndarray:
    """Cell probabilities of the mixture with weight ``rho_n = min(1, rho / sqrt(n))``."""
    rho_n = min(1.0, rho / math.sqrt(n))
    return (1.0 - rho_n) * ctx.p0 + rho_n * ph_vector(h, ctx)


def drift_vector(rho, gamma, h, pi, ctx, delta: Optional[ShiftVector] = None) -> np.ndarray:
    drift = np.zeros(ctx.m)
    if rho != 0.0:
        drift = drift + rho * (ph_vector(h, ctx) - ctx.p0)
    if gamma != 0.0:
        delta = shift_vector(pi, ctx) if delta is None else delta
        drift = drift + gamma * delta.delta
    return drift


def noncentrality(rho: float, gamma: float, h: AlternativeH, pi: ContaminationPi,
                  ctx: AsymptoticContext, delta: Optional[ShiftVector] = None) -> float:
    """Squared norm of the projected, variance-weighted drift.

    ``delta`` may be passed to reuse a precomputed :class:`ShiftVector`.
    """
    if rho < 0.0 or gamma < 0.0:
        raise DomainError("rho and gamma must be nonnegative")
    v = ctx.weighted_projector @ drift_vector(rho, gamma, h, pi, ctx, delta)
    return float(v @ v)


def power_from_lambda2(lambda2: float, m: int, alpha: float) -> float:
    """``1 - F_{m-2}(chi2_{m-2}(1 - alpha), lambda2)``."""
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    threshold = chi_square_quantile(m - 2, 1.0 - alpha)
    return 1.0 - noncentral_chi2_cdf(m - 2, lambda2, threshold)


def asymptotic_power(rho: float, gamma: float, h: AlternativeH, pi: ContaminationPi,
                     ctx: AsymptoticContext, alpha: float = 0.05, m: Optional[int] = None,
                     delta: Optional[ShiftVector] = None) -> float:
    """Limiting rejection probability of the level-``alpha`` test."""
    m = ctx.m if m is None else m
    if m != ctx.m:
        raise DomainError(f"context has {ctx.m} cells, got m={m}")
    return power_from_lambda2(noncentrality(rho, gamma, h, pi, ctx, delta), m, alpha)


def robustness_bound(gamma: float, pi: ContaminationPi, ctx: AsymptoticContext,
                     delta: Optional[ShiftVector] = None) -> float:
    """Bound on ``|W(rho, gamma, Pi) - W(rho, 0, Pi)|`` valid for every ``rho``.

    ``gamma * sqrt(2 / pi) * ||Q P0^{-1/2}||_F * |delta(Pi)|``.
    """
    if gamma < 0.0:
        raise DomainError("gamma must be nonnegative")
    if gamma == 0.0:
        return 0.0
    delta = shift_vector(pi, ctx) if delta is None else delta
    return gamma * _SQRT_2_OVER_PI * float(np.linalg.norm(ctx.weighted_projector)) * delta.norm()
