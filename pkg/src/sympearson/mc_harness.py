"""Reproducible Monte Carlo experiments for the symmetrized Pearson test.

Replicate ``k`` of an experiment with master seed ``s`` draws from
``SeedSequence(s, spawn_key=(k,))``, so any replicate can be replayed alone
and results do not depend on how replicates are spread across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .ar_process import ObservedSample, ScenarioSpec, simulate
from .asymptotics import (
    AsymptoticContext,
    asymptotic_power,
    delta_s,
    noncentrality,
    pa_vector,
    robustness_bound,
    shift_vector,
)
from .empirical import build_edf, symmetrize
from .estimation import FitResult, fit_ar
from .exceptions import DomainError, SymPearsonError, TooManyFailuresError
from .pearson_test import Partition, count_cells, null_partition, residual_test

__all__ = [
    "ExperimentConfig",
    "PowerResult",
    "ExpansionRow",
    "ExpansionCheck",
    "CltCheck",
    "replicate_rng",
    "run_power",
    "check_expansion",
    "check_clt_nu",
    "expansion_deviation",
]

FAILURE_BUDGET = 0.001


def replicate_rng(seed: int, k: int) -> np.random.Generator:
    """Independent generator for replicate ``k`` of master seed ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment.

    ``partition=None`` uses the data-driven equiprobable partition inside
    every replicate; a :class:`Partition` fixes the cells for all of them.
    ``n_jobs`` only affects speed, never results.
    """

    scenario: ScenarioSpec
    m: int = 5
    alpha: float = 0.05
    partition: Optional[Partition] = None
    reps: int = 1000
    seed: int = 0
    n_jobs: int = 1
    mean_method: str = "mean"
    beta_method: str = "ls"

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps!r}")
        if self.m <= 2:
            raise DomainError(f"m must exceed 2, got {self.m}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.partition is not None and self.partition.m != self.m:
            raise DomainError(f"partition has {self.partition.m} cells but m={self.m}")

    def with_scenario(self, **changes) -> "ExperimentConfig":
        return ExperimentConfig(
            scenario=self.scenario.replace(**changes), m=self.m, alpha=self.alpha,
            partition=self.partition, reps=self.reps, seed=self.seed, n_jobs=self.n_jobs,
            mean_method=self.mean_method, beta_method=self.beta_method)

    def limit_partition(self) -> Partition:
        """Partition the test's cells converge to under the configured truth."""
        if self.partition is not None:
            return self.partition
        return null_partition(self.scenario.model.theta0.theta, self.m)

    def context(self) -> AsymptoticContext:
        return AsymptoticContext.build(self.limit_partition(), self.scenario.model)


def _chunks(total, n_jobs):
    size = max(1, math.ceil(total / max(1, 4 * n_jobs)))
    return [(start, min(total, start + size)) for start in range(0, total, size)]


def _map_replicates(worker: Callable, cfg: ExperimentConfig) -> List:
    """Run ``worker(cfg, k)`` for every replicate, preserving replicate order."""
    if cfg.n_jobs <= 1:
        return [worker(cfg, k) for k in range(cfg.reps)]
    spans = _chunks(cfg.reps, cfg.n_jobs)
    with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
        parts = list(pool.map(_run_span, [worker] * len(spans), [cfg] * len(spans), spans))
    return [item for part in parts for item in part]


def _run_span(worker, cfg, span):
    return [worker(cfg, k) for k in range(*span)]


# Power.


@dataclass(frozen=True)
class PowerResult:
    """Empirical and asymptotic rejection probabilities for one scenario."""

    w_empirical: float
    ci_lo: float
    ci_hi: float
    w_asymptotic: float
    lambda2: float
    bound: float
    reps: int
    n_failed: int
    mean_theta: float
    mean_counts: np.ndarray = field(repr=False)
    rejections: np.ndarray = field(repr=False)

    @property
    def half_width(self) -> float:
        return 1.96 * math.sqrt(self.w_empirical * (1.0 - self.w_empirical) / self.reps)


def _power_replicate(cfg: ExperimentConfig, k: int):
    rng = replicate_rng(cfg.seed, k)
    sample = simulate(cfg.scenario, rng)
    try:
        fit = fit_ar(sample.y, cfg.scenario.model.p, cfg.mean_method, cfg.beta_method)
        rep = residual_test(fit.residuals, m=cfg.m, alpha=cfg.alpha, partition=cfg.partition)
    except SymPearsonError:
        return None
    return rep.reject, rep.theta_hat, rep.statistic, rep.counts.nu


def run_power(cfg: ExperimentConfig) -> PowerResult:
    """Rejection frequency over ``cfg.reps`` replicates plus the limiting power.

    Replicates whose pipeline raises are dropped; more than 0.1% of them
    raises :class:`TooManyFailuresError`.
    """
    outcomes = _map_replicates(_power_replicate, cfg)
    ok = [o for o in outcomes if o is not None]
    n_failed = len(outcomes) - len(ok)
    if n_failed > FAILURE_BUDGET * cfg.reps:
        raise TooManyFailuresError(f"{n_failed} of {cfg.reps} replicates failed")
    rejections = np.array([o[0] for o in ok], dtype=bool)
    w = float(rejections.mean())
    half = 1.96 * math.sqrt(w * (1.0 - w) / len(ok))
    sc = cfg.scenario
    ctx = cfg.context()
    delta = shift_vector(sc.pi, ctx) if sc.gamma > 0.0 else None
    lam2 = noncentrality(sc.rho, sc.gamma, sc.h, sc.pi, ctx, delta)
    return PowerResult(
        w_empirical=w,
        ci_lo=max(0.0, w - half),
        ci_hi=min(1.0, w + half),
        w_asymptotic=asymptotic_power(sc.rho, sc.gamma, sc.h, sc.pi, ctx, cfg.alpha, delta=delta),
        lambda2=lam2,
        bound=robustness_bound(sc.gamma, sc.pi, ctx, delta),
        reps=len(ok),
        n_failed=n_failed,
        mean_theta=float(np.mean([o[1] for o in ok])),
        mean_counts=np.mean([o[3] for o in ok], axis=0),
        rejections=rejections,
    )


# Expansion of the symmetrized residual EDF.


def expansion_deviation(sample: ObservedSample, fit: FitResult, grid) -> np.ndarray:
    """``sqrt(n) [S_hat(x) - S(x)]`` on ``grid``; needs the hidden innovations."""
    eps = sample.oracle.eps
    grid = np.asarray(grid, dtype=float)
    s_hat = symmetrize(build_edf(fit.residuals))
    s_true = symmetrize(build_edf(eps))
    # Integer doubled counts keep the difference exact.
    diff = s_hat.doubled_count(grid) - s_true.doubled_count(grid)
    return diff / (2.0 * math.sqrt(eps.size))


def _expansion_replicate(cfg: ExperimentConfig, k: int, grid):
    sample = simulate(cfg.scenario, replicate_rng(cfg.seed, k))
    fit = fit_ar(sample.y, cfg.scenario.model.p, cfg.mean_method, cfg.beta_method)
    return expansion_deviation(sample, fit, grid)


class _GridWorker:
    def __init__(self, grid):
        self.grid = tuple(float(x) for x in grid)

    def __call__(self, cfg, k):
        return _expansion_replicate(cfg, k, self.grid)


@dataclass(frozen=True)
class ExpansionRow:
    x: float
    mean: float
    se: float
    lo: float
    hi: float
    predicted: float
    covered: bool


@dataclass(frozen=True)
class ExpansionCheck:
    """Replicate means of the symmetrized EDF deviation against ``gamma Delta_S``."""

    rows: List[ExpansionRow]
    antisymmetry: List[tuple]  # (x, mean of d(x) + d(-x), se, within band)
    z_width: float

    @property
    def coverage(self) -> float:
        return sum(r.covered for r in self.rows) / len(self.rows)

    @property
    def antisymmetric(self) -> bool:
        return all(ok for *_, ok in self.antisymmetry)


def check_expansion(cfg: ExperimentConfig, grid: Sequence[float], z_width: float = 3.0) -> ExpansionCheck:
    """Compare ``mean sqrt(n)[S_hat(x) - S(x)]`` with ``gamma Delta_S(x, Pi)``.

    Each grid point gets a band of ``z_width`` standard errors around the
    replicate mean; a point is covered when the prediction lies in it.
    """
    grid = np.asarray(grid, dtype=float)
    draws = np.array(_map_replicates(_GridWorker(grid), cfg))
    N = draws.shape[0]
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(N) if N > 1 else np.zeros_like(mean)
    sc = cfg.scenario
    ctx = cfg.context()
    rows = []
    for i, x in enumerate(grid):
        pred = sc.gamma * delta_s(float(x), sc.pi, ctx) if sc.gamma > 0.0 else 0.0
        lo, hi = mean[i] - z_width * se[i], mean[i] + z_width * se[i]
        rows.append(ExpansionRow(float(x), float(mean[i]), float(se[i]), float(lo), float(hi),
                                 float(pred), bool(lo <= pred <= hi)))
    anti = []
    index = {float(x): i for i, x in enumerate(grid)}
    for i, x in enumerate(grid):
        j = index.get(float(-x))
        if j is None or x < 0.0:
            continue
        s = draws[:, i] + draws[:, j]
        s_se = float(s.std(ddof=1) / math.sqrt(N)) if N > 1 else 0.0
        s_mean = float(s.mean())
        anti.append((float(x), s_mean, s_se, abs(s_mean) <= z_width * s_se))
    return ExpansionCheck(rows=rows, antisymmetry=anti, z_width=z_width)


# Oracle count CLT.


@dataclass(frozen=True)
class CltCheck:
    """Empirical covariance of ``sqrt(n)(nu / n - p_A)`` against ``P0 - p0 p0^T``."""

    empirical: np.ndarray
    limit: np.ndarray
    se: np.ndarray
    mean: np.ndarray

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.empirical - self.limit) / self.se

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.empirical - self.limit)))

    @property
    def max_z(self) -> float:
        return float(np.nanmax(self.z))

    def within(self, k: float = 4.0) -> bool:
        return bool(np.all(np.abs(self.empirical - self.limit) <= k * self.se))


def _clt_replicate(cfg: ExperimentConfig, k: int):
    sample = simulate(cfg.scenario, replicate_rng(cfg.seed, k))
    return count_cells(sample.oracle.eps, cfg.limit_partition()).nu


def check_clt_nu(cfg: ExperimentConfig) -> CltCheck:
    """Covariance diagnostic for the oracle innovation counts (no outliers)."""
    sc = cfg.scenario
    if sc.gamma != 0.0:
        raise DomainError("the count CLT diagnostic is defined for gamma = 0")
    if cfg.reps < 2:
        raise DomainError("need at least two replicates for a covariance")
    ctx = cfg.context()
    counts = np.array(_map_replicates(_clt_replicate, cfg), dtype=float)
    n = sc.n
    pa = pa_vector(sc.h, n, sc.rho, ctx)
    X = math.sqrt(n) * (counts / n - pa)
    Xc = X - X.mean(axis=0)
    N = X.shape[0]
    prods = Xc[:, :, None] * Xc[:, None, :]
    emp = prods.sum(axis=0) / (N - 1)
    se = prods.std(axis=0, ddof=1) / math.sqrt(N)
    return CltCheck(empirical=emp, limit=ctx.limit_covariance, se=se, mean=X.mean(axis=0))
