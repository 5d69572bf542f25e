"""Stationary AR(p) process with a mean, local mixture innovations and
sporadic additive gross errors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from .distributions import (
    AlternativeH,
    ContaminationPi,
    NormalH,
    NormalScale,
    PointMassPi,
)
from .exceptions import ConstructionError, NonStationaryError, OracleUnavailableError

__all__ = [
    "ARModelSpec",
    "ScenarioSpec",
    "ObservedSample",
    "SimulationTruth",
    "check_stationary",
    "sample_innovation",
    "simulate",
]

_ROOT_MARGIN = 1e-9


def check_stationary(beta: Sequence[float]) -> Tuple[bool, float]:
    """Return ``(is_stationary, max_root_modulus)`` for AR coefficients.

    The roots are those of ``z^p - beta_1 z^(p-1) - ... - beta_p``, i.e. the
    eigenvalues of the companion matrix.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if beta.ndim != 1 or beta.size < 1:
        raise ConstructionError("AR order must be at least 1")
    roots = np.roots(np.concatenate(([1.0], -beta)))
    modulus = float(np.max(np.abs(roots))) if roots.size else 0.0
    return modulus < 1.0 - _ROOT_MARGIN, modulus


@dataclass(frozen=True)
class ARModelSpec:
    """``v_t = beta_1 v_{t-1} + ... + beta_p v_{t-p} + nu + eps_t``.

    ``mu`` is the process mean, tied to the intercept by
    ``nu = (1 - sum(beta)) * mu``.
    """

    beta: Tuple[float, ...]
    nu: float = 0.0
    theta0: NormalScale = NormalScale(1.0)

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(self.beta))
        object.__setattr__(self, "beta", beta)
        if not isinstance(self.theta0, NormalScale):
            object.__setattr__(self, "theta0", NormalScale(float(self.theta0)))
        ok, modulus = check_stationary(beta)
        if not ok:
            raise NonStationaryError(
                f"characteristic roots must lie inside the unit circle; max modulus {modulus:.6g}")

    @classmethod
    def from_mean(cls, beta, mu: float, theta0=1.0) -> "ARModelSpec":
        beta = tuple(float(b) for b in np.atleast_1d(beta))
        return cls(beta=beta, nu=(1.0 - sum(beta)) * mu, theta0=theta0)

    @property
    def p(self) -> int:
        return len(self.beta)

    @property
    def mu(self) -> float:
        return self.nu / (1.0 - sum(self.beta))

    @property
    def coefficients(self) -> Tuple[float, ...]:
        """``(beta_0, beta_1, ..., beta_p)`` with ``beta_0 = -1``."""
        return (-1.0,) + self.beta


@dataclass(frozen=True)
class ScenarioSpec:
    """Which mixture alternative and contamination regime data come from."""

    model: ARModelSpec
    n: int
    rho: float = 0.0
    h: AlternativeH = NormalH(3.0)
    gamma: float = 0.0
    pi: ContaminationPi = PointMassPi(0.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 50:
            raise ConstructionError(f"sample size must be an integer >= 50, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (self.rho >= 0.0 and math.isfinite(self.rho)):
            raise ConstructionError(f"rho must be finite and nonnegative, got {self.rho!r}")
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ConstructionError(f"gamma must be finite and nonnegative, got {self.gamma!r}")

    @property
    def rho_n(self) -> float:
        return min(1.0, self.rho / math.sqrt(self.n))

    @property
    def gamma_n(self) -> float:
        return min(1.0, self.gamma / math.sqrt(self.n))

    def replace(self, **changes) -> "ScenarioSpec":
        fields = dict(model=self.model, n=self.n, rho=self.rho, h=self.h,
                      gamma=self.gamma, pi=self.pi)
        fields.update(changes)
        return ScenarioSpec(**fields)


@dataclass(frozen=True)
class SimulationTruth:
    """Hidden quantities behind a simulated series; for oracle checks only."""

    eps: np.ndarray
    v: np.ndarray
    z: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class ObservedSample:
    """Observations ``y_{1-p}, ..., y_n``.

    ``y`` is the only field an estimator may look at.  Simulated samples also
    carry their :class:`SimulationTruth`, reachable through :attr:`oracle`.
    """

    y: np.ndarray
    p: int
    _truth: Optional[SimulationTruth] = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.y.size - self.p

    @property
    def has_oracle(self) -> bool:
        return self._truth is not None

    @property
    def oracle(self) -> SimulationTruth:
        if self._truth is None:
            raise OracleUnavailableError("this sample was not simulated; no hidden truth")
        return self._truth


def sample_innovation(scenario: ScenarioSpec, rng: np.random.Generator, size=None):
    """Draw innovations from ``(1 - rho_n) Phi(x / theta0) + rho_n H(x)``."""
    theta0 = scenario.model.theta0.theta
    rho_n = scenario.rho_n
    if size is None:
        draws = sample_innovation(scenario, rng, 1)
        return float(draws[0])
    eps = theta0 * rng.standard_normal(size)
    if rho_n > 0.0:
        from_h = rng.random(size) < rho_n
        k = int(np.count_nonzero(from_h))
        if k:
            eps[from_h] = scenario.h.sample(rng, k)
    return eps


def burn_in_length(p: int) -> int:
    return max(1000, 50 * p)


def simulate(scenario: ScenarioSpec, rng: np.random.Generator) -> ObservedSample:
    """Simulate ``y_{1-p}, ..., y_n`` for a scenario.

    The zero-mean recursion ``u_t = sum_j beta_j u_{t-j} + eps_t`` is run from
    a zero state through a burn-in of ``max(1000, 50 p)`` steps; then
    ``v_t = mu + u_t`` and every observed position gets an outlier with
    probability ``gamma_n``.
    """
    model = scenario.model
    p, n = model.p, scenario.n
    burn = burn_in_length(p)
    total = burn + n + p
    eps_all = sample_innovation(scenario, rng, total)
    a = np.concatenate(([1.0], -np.asarray(model.beta)))
    u = signal.lfilter([1.0], a, eps_all)[burn:]
    v = model.mu + u
    gamma_n = scenario.gamma_n
    if gamma_n > 0.0:
        z = rng.random(n + p) < gamma_n
        xi = np.asarray(scenario.pi.sample(rng, n + p), dtype=float)
        y = v + np.where(z, xi, 0.0)
    else:
        z = np.zeros(n + p, dtype=bool)
        xi = np.zeros(n + p)
        y = v.copy()
    truth = SimulationTruth(eps=eps_all[burn + p:], v=v, z=z, xi=xi)
    return ObservedSample(y=y, p=p, _truth=truth)
