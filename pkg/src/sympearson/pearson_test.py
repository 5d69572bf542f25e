"""The symmetrized Pearson chi-square test for normality of AR innovations.

Cells come in mirrored pairs ``B_j = (x_{j-1}, x_j] U (-x_j, -x_{j-1}]`` with
``0 = x_0 < x_1 < ... < x_m = inf``.  The scale is estimated from the pooled
counts by the modified minimum chi-square equation
``sum_j nu_j p_j'(theta) / p_j(theta) = 0`` and the statistic is referred to
the chi-square law with ``m - 2`` degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .distributions import chi_square_cdf, chi_square_quantile, std_normal_quantile
from .estimation import FitResult, fit_ar
from .exceptions import DomainError, NoRootError

__all__ = [
    "Partition",
    "CellCounts",
    "TestReport",
    "default_partition",
    "null_partition",
    "cell_probs",
    "count_cells",
    "estimating_function",
    "solve_theta",
    "chi_square_statistic",
    "pearson_sum",
    "decide",
    "residual_test",
    "run_test",
]

_Q75 = 0.6744897501960817
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
LOW_COUNT = 5


@dataclass(frozen=True)
class Partition:
    """Symmetric partition given by its positive finite boundaries.

    ``points`` is the full array ``(0, x_1, ..., x_{m-1}, inf)``.
    ``pilot_scale`` records the scale a data-driven partition was anchored on.
    """

    boundaries: Tuple[float, ...]
    pilot_scale: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        b = tuple(float(x) for x in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if len(b) < 2:
            raise DomainError(f"m must exceed 2 (need at least two finite boundaries), got m={len(b) + 1}")
        arr = np.asarray(b)
        if not np.all(np.isfinite(arr)) or arr[0] <= 0.0 or np.any(np.diff(arr) <= 0.0):
            raise DomainError(f"boundaries must be finite, positive and strictly increasing: {b}")

    @property
    def m(self) -> int:
        return len(self.boundaries) + 1

    @property
    def finite(self) -> np.ndarray:
        return np.asarray(self.boundaries)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate(([0.0], self.boundaries, [np.inf]))

    def scaled(self, c: float) -> "Partition":
        pilot = None if self.pilot_scale is None else c * self.pilot_scale
        return Partition(tuple(c * x for x in self.boundaries), pilot)


@dataclass(frozen=True)
class CellCounts:
    """Counts in the positive, negative and pooled symmetric cells."""

    nu_plus: np.ndarray
    nu_minus: np.ndarray

    @property
    def nu(self) -> np.ndarray:
        return self.nu_plus + self.nu_minus

    @property
    def n(self):
        return self.nu.sum()

    @classmethod
    def pooled(cls, nu) -> "CellCounts":
        """Counts known only in pooled form (positive half carries everything)."""
        nu = np.asarray(nu)
        return cls(nu_plus=nu, nu_minus=np.zeros_like(nu))


def _equiprobable_ratios(m):
    j = np.arange(1, m)
    return std_normal_quantile(0.5 + j / (2.0 * m)) / _Q75


def null_partition(theta: float, m: int) -> Partition:
    """Partition with ``m`` equiprobable cells under ``Phi(x / theta)``."""
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    ratios = _equiprobable_ratios(m)
    return Partition(tuple(theta * _Q75 * ratios), pilot_scale=theta)


def default_partition(residuals, m: int) -> Partition:
    """Equiprobable partition under the normal law fitted by the MAD scale.

    ``x_j = theta_pilot * Phi^{-1}(1/2 + j / (2m))`` with
    ``theta_pilot = median(|residuals|) / Phi^{-1}(3/4)``.
    """
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    residuals = np.asarray(residuals, dtype=float)
    if residuals.size == 0:
        raise DomainError("need residuals to build a partition")
    mad = float(np.median(np.abs(residuals)))
    if not mad > 0.0:
        raise DomainError("median absolute residual is zero; cannot anchor the partition")
    # mad * ratio keeps the middle boundary (even m) exactly at the median.
    return Partition(tuple(mad * _equiprobable_ratios(m)), pilot_scale=mad / _Q75)


def _tails_and_dens(finite, theta):
    z = finite / theta
    tail = 0.5 * special.erfc(z * _INV_SQRT2)
    dens = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return tail, dens


def cell_probs(part: Partition, theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Pooled cell probabilities ``p_j(theta)`` and derivatives ``p_j'(theta)``.

    ``p_j = 2 (Phi(x_j / theta) - Phi(x_{j-1} / theta))`` and
    ``p_j' = 2 (x_{j-1} phi(x_{j-1} / theta) - x_j phi(x_j / theta)) / theta^2``.
    """
    if not theta > 0.0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    x = part.finite
    tail, dens = _tails_and_dens(x, theta)
    upper = np.concatenate(([0.5], tail))
    lower = np.concatenate((tail, [0.0]))
    probs = 2.0 * (upper - lower)
    xd = x * dens
    lo = np.concatenate(([0.0], xd))
    hi = np.concatenate((xd, [0.0]))
    deriv = 2.0 * (lo - hi) / (theta * theta)
    return probs, deriv


def count_cells(residuals, part: Partition) -> CellCounts:
    """Count residuals in ``(x_{j-1}, x_j]`` and ``(-x_j, -x_{j-1}]``.

    A residual equal to zero falls in ``(-x_1, 0]``, so the pooled counts
    always add up to ``n``.
    """
    e = np.asarray(residuals, dtype=float).ravel()
    x = part.finite
    m = part.m
    pos = e[e > 0.0]
    neg = -e[e <= 0.0]
    # e in (x_{j-1}, x_j]  <=>  j - 1 = #{x_i < e}
    idx_plus = np.searchsorted(x, pos, side="left")
    # -e in [x_{j-1}, x_j)  <=>  j - 1 = #{x_i <= -e}
    idx_minus = np.searchsorted(x, neg, side="right")
    nu_plus = np.bincount(idx_plus, minlength=m)
    nu_minus = np.bincount(idx_minus, minlength=m)
    return CellCounts(nu_plus=nu_plus, nu_minus=nu_minus)


def estimating_function(nu, part: Partition, theta: float) -> float:
    """``psi(theta) = sum_j nu_j p_j'(theta) / p_j(theta)``."""
    nu = np.asarray(nu, dtype=float)
    probs, deriv = cell_probs(part, theta)
    used = nu > 0.0
    probs, deriv, nu = probs[used], deriv[used], nu[used]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = deriv / probs
    if not np.all(np.isfinite(ratio)):
        # Underflowed inner cells: their mass is still moving in, psi -> +inf.
        return math.inf
    return float(np.dot(nu, ratio))


def _pilot_from_counts(nu, part):
    cum = np.cumsum(nu)[:-1] / nu.sum()
    inside = (cum > 0.0) & (cum < 1.0)
    if not np.any(inside):
        return float(part.finite[len(part.finite) // 2] / _Q75)
    j = np.flatnonzero(inside)[np.argmin(np.abs(cum[inside] - 0.5))]
    return float(part.finite[j] / std_normal_quantile(0.5 + 0.5 * cum[j]))


def solve_theta(counts, part: Partition, theta_init: Optional[float] = None,
                rel_tol: float = 1e-10) -> float:
    """Root of the scale estimating equation nearest a pilot scale.

    The pilot is ``theta_init`` if given, else the partition's pilot scale,
    else a grouped median-type estimate from the counts.  Sign changes are
    searched on a geometric grid expanding outwards from the pilot up to a
    factor ``2**20`` on either side; the closest bracket is then bisected to
    relative width ``rel_tol``.

    Raises
    ------
    NoRootError
        If no sign change exists in ``[pilot / 2**20, pilot * 2**20]``.
    """
    nu = np.asarray(counts.nu if isinstance(counts, CellCounts) else counts, dtype=float)
    if nu.size != part.m:
        raise DomainError(f"expected {part.m} counts, got {nu.size}")
    if not nu.sum() >= 1:
        raise DomainError("counts must sum to at least one")
    if theta_init is None:
        theta_init = part.pilot_scale if part.pilot_scale is not None else _pilot_from_counts(nu, part)

    def psi(t):
        return estimating_function(nu, part, t)

    f0 = psi(theta_init)
    if f0 == 0.0:
        return float(theta_init)
    step = math.sqrt(2.0)
    bracket = None
    lo_t, lo_f = theta_init, f0
    hi_t, hi_f = theta_init, f0
    for _ in range(40):
        t = lo_t / step
        f = psi(t)
        if f == 0.0:
            return float(t)
        if (f > 0.0) != (lo_f > 0.0):
            bracket = (t, lo_t, f)
            break
        lo_t, lo_f = t, f
        t = hi_t * step
        f = psi(t)
        if f == 0.0:
            return float(t)
        if (f > 0.0) != (hi_f > 0.0):
            bracket = (hi_t, t, hi_f)
            break
        hi_t, hi_f = t, f
    if bracket is None:
        raise NoRootError(
            f"scale equation has no sign change within a factor 2**20 of {theta_init:.6g}; counts={nu}")
    a, b, fa = bracket
    while b - a > rel_tol * a:
        c = 0.5 * (a + b)
        fc = psi(c)
        if fc == 0.0:
            return float(c)
        if (fc > 0.0) == (fa > 0.0):
            a, fa = c, fc
        else:
            b = c
    return float(0.5 * (a + b))


def pearson_sum(nu, probs) -> float:
    """``sum_j (nu_j - n p_j)^2 / (n p_j)`` for given counts and probabilities."""
    nu = np.asarray(nu, dtype=float)
    expected = nu.sum() * np.asarray(probs, dtype=float)
    return float(np.sum((nu - expected) ** 2 / expected))


def chi_square_statistic(counts, part: Partition, theta_hat: float) -> float:
    """Pearson sum at the estimated scale."""
    nu = counts.nu if isinstance(counts, CellCounts) else counts
    return pearson_sum(nu, cell_probs(part, theta_hat)[0])


def decide(statistic: float, m: int, alpha: float) -> Tuple[float, bool]:
    """Threshold ``chi2_{m-2}(1 - alpha)`` and the rejection decision."""
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    threshold = chi_square_quantile(m - 2, 1.0 - alpha)
    return threshold, bool(statistic > threshold)


@dataclass(frozen=True)
class TestReport:
    """Outcome of the symmetrized Pearson test with all intermediate results."""

    __test__ = False  # not a pytest class

    counts: CellCounts
    theta_hat: float
    statistic: float
    dof: int
    threshold: float
    alpha: float
    reject: bool
    partition: Partition
    fit: Optional[FitResult] = None

    @property
    def pvalue(self) -> float:
        return float(1.0 - chi_square_cdf(self.dof, self.statistic))

    @property
    def low_count_cells(self) -> Tuple[int, ...]:
        """1-based indices of cells with fewer than five observations."""
        return tuple(int(j) + 1 for j in np.flatnonzero(self.counts.nu < LOW_COUNT))

    def to_dict(self) -> dict:
        out = {
            "n": int(self.counts.n),
            "m": self.partition.m,
            "boundaries": list(self.partition.boundaries),
            "nu_plus": [int(v) for v in self.counts.nu_plus],
            "nu_minus": [int(v) for v in self.counts.nu_minus],
            "nu": [int(v) for v in self.counts.nu],
            "theta_hat": self.theta_hat,
            "statistic": self.statistic,
            "dof": self.dof,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "pvalue": self.pvalue,
            "reject": self.reject,
            "low_count_cells": list(self.low_count_cells),
        }
        if self.fit is not None:
            out["mu_hat"] = self.fit.mu_hat
            out["beta_hat"] = [float(b) for b in self.fit.beta_hat]
        return out


def residual_test(residuals, m: int = 5, alpha: float = 0.05,
                   partition: Optional[Partition] = None) -> TestReport:
    """Run the test on residuals that were already computed."""
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if partition is None:
        partition = default_partition(residuals, m)
    elif partition.m != m:
        raise DomainError(f"partition has {partition.m} cells but m={m}")
    counts = count_cells(residuals, partition)
    theta_init = partition.pilot_scale
    if theta_init is None:
        theta_init = float(np.median(np.abs(residuals))) / _Q75
        if not theta_init > 0.0:
            theta_init = None
    theta_hat = solve_theta(counts, partition, theta_init)
    stat = chi_square_statistic(counts, partition, theta_hat)
    threshold, reject = decide(stat, m, alpha)
    return TestReport(counts=counts, theta_hat=theta_hat, statistic=stat, dof=m - 2,
                      threshold=threshold, alpha=alpha, reject=reject, partition=partition)


def run_test(y, p: int, m: int = 5, alpha: float = 0.05, partition: Optional[Partition] = None,
             mean_method: str = "mean", beta_method: str = "ls") -> TestReport:
    """Fit the AR(p) model to ``y_{1-p}, ..., y_n`` and test normality of innovations.

    Parameters
    ----------
    y : array_like of shape (n + p,)
        Observations; the first ``p`` values are the pre-sample.
    p : int
        Autoregression order.
    m : int
        Number of symmetric cells, ``m > 2``.
    alpha : float
        Asymptotic level.
    partition : Partition, optional
        Fixed partition.  By default an equiprobable partition is anchored on
        the MAD scale of the residuals.
    """
    if m <= 2:
        raise DomainError(f"m must exceed 2, got {m}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    fit = fit_ar(y, p, mean_method=mean_method, beta_method=beta_method)
    report = residual_test(fit.residuals, m=m, alpha=alpha, partition=partition)
    return TestReport(counts=report.counts, theta_hat=report.theta_hat, statistic=report.statistic,
                      dof=report.dof, threshold=report.threshold, alpha=alpha, reject=report.reject,
                      partition=report.partition, fit=fit)
