"""Preliminary root-n consistent estimates of the AR mean and coefficients,
and the residuals built from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, SingularDesignError

__all__ = [
    "FitResult",
    "estimate_mean",
    "estimate_beta",
    "compute_residuals",
    "fit_ar",
    "lag_matrix",
]

MEAN_METHODS = ("mean", "median")
BETA_METHODS = ("ls", "huber")


@dataclass(frozen=True)
class FitResult:
    """Fitted mean and coefficients together with the residual series.

    Attributes
    ----------
    mu_hat : float
    beta_hat : ndarray of shape (p,)
    delta_hat : float
        ``1 - sum(beta_hat)``.
    residuals : ndarray of shape (n,)
        Residuals for ``t = 1, ..., n``.
    centered : ndarray of shape (n + p,)
        ``y_t - mu_hat`` for ``t = 1 - p, ..., n``.
    """

    mu_hat: float
    beta_hat: np.ndarray
    delta_hat: float
    residuals: np.ndarray
    centered: np.ndarray

    @property
    def p(self) -> int:
        return self.beta_hat.size

    @property
    def n(self) -> int:
        return self.residuals.size


def _check_length(y, p):
    if y.ndim != 1:
        raise DomainError("series must be one-dimensional")
    n = y.size - p
    if n < p + 10:
        raise DomainError(f"need n >= p + 10 observations after the {p} pre-sample values, got n={n}")
    return n


def estimate_mean(y, p: int, method: str = "mean") -> float:
    """Estimate the process mean from ``y_1, ..., y_n``.

    The first ``p`` entries of ``y`` are the pre-sample values and are left
    out.  ``method`` is ``"mean"`` or the outlier-resistant ``"median"``.
    """
    y = np.asarray(y, dtype=float)
    _check_length(y, p)
    obs = y[p:]
    if method == "mean":
        return float(np.mean(obs))
    if method == "median":
        return float(np.median(obs))
    raise DomainError(f"unknown mean method {method!r}; expected one of {MEAN_METHODS}")


def lag_matrix(u, p: int) -> np.ndarray:
    """Design matrix whose row ``t`` holds ``(u_{t-1}, ..., u_{t-p})``, ``t = 1..n``."""
    u = np.asarray(u, dtype=float)
    n = u.size - p
    return np.column_stack([u[p - j:p - j + n] for j in range(1, p + 1)])


def _least_squares(X, target):
    coef, _, rank, sv = np.linalg.lstsq(X, target, rcond=None)
    if rank < X.shape[1] or sv[-1] <= 1e-12 * max(sv[0], np.finfo(float).tiny):
        raise SingularDesignError(
            f"lagged design has rank {rank} < {X.shape[1]}; degenerate series")
    return coef


def _huber_irls(X, target, coef, c=1.345, max_iter=50, tol=1e-10):
    for _ in range(max_iter):
        r = target - X @ coef
        scale = np.median(np.abs(r - np.median(r))) / 0.6744897501960817
        if scale <= 0.0:
            break
        a = np.abs(r) / (c * scale)
        w = np.where(a <= 1.0, 1.0, 1.0 / np.maximum(a, 1.0))
        sw = np.sqrt(w)
        new = _least_squares(X * sw[:, None], target * sw)
        if np.max(np.abs(new - coef)) <= tol * (1.0 + np.max(np.abs(coef))):
            return new
        coef = new
    return coef


def estimate_beta(u_hat, p: int, method: str = "ls") -> np.ndarray:
    """Regress ``u_t`` on its ``p`` lags over ``t = 1, ..., n``.

    ``method="ls"`` is ordinary least squares (solved through an SVD-based
    factorization); ``method="huber"`` refines it by Huber IRLS.

    Raises
    ------
    SingularDesignError
        If the lag design is rank deficient, e.g. for a constant series.
    """
    u_hat = np.asarray(u_hat, dtype=float)
    _check_length(u_hat, p)
    X = lag_matrix(u_hat, p)
    target = u_hat[p:]
    coef = _least_squares(X, target)
    if method == "ls":
        return coef
    if method == "huber":
        return _huber_irls(X, target, coef)
    raise DomainError(f"unknown beta method {method!r}; expected one of {BETA_METHODS}")


def compute_residuals(y, mu_hat: float, beta_hat) -> FitResult:
    """Residuals ``u_t - beta_1 u_{t-1} - ... - beta_p u_{t-p}``, ``u = y - mu_hat``."""
    y = np.asarray(y, dtype=float)
    beta_hat = np.atleast_1d(np.asarray(beta_hat, dtype=float))
    p = beta_hat.size
    centered = y - mu_hat
    n = centered.size - p
    if n < 1:
        raise DomainError("series shorter than the AR order")
    resid = centered[p:].copy()
    for j in range(1, p + 1):
        resid -= beta_hat[j - 1] * centered[p - j:p - j + n]
    return FitResult(
        mu_hat=float(mu_hat),
        beta_hat=beta_hat,
        delta_hat=float(1.0 - beta_hat.sum()),
        residuals=resid,
        centered=centered,
    )


def fit_ar(y, p: int, mean_method: str = "mean", beta_method: str = "ls") -> FitResult:
    """Estimate mean, then coefficients, then residuals."""
    y = np.asarray(y, dtype=float)
    mu_hat = estimate_mean(y, p, mean_method)
    beta_hat = estimate_beta(y - mu_hat, p, beta_method)
    return compute_residuals(y, mu_hat, beta_hat)
