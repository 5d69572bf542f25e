"""scikit-learn compatible front end.

>>> import numpy as np
>>> from sympearson import SymmetrizedPearsonTest
>>> y = np.random.default_rng(0).standard_normal(501)
>>> SymmetrizedPearsonTest(order=1).fit(y).reject_
False
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .estimation import compute_residuals, estimate_beta, estimate_mean
from .pearson_test import TestReport, residual_test
from .validation import check_alpha, check_cells, check_order, check_partition, check_series


class ARResidualizer(TransformerMixin, BaseEstimator):
    """Fit an AR(p) model with a mean and map series to their residuals.

    The first ``order`` values of every series passed to :meth:`fit` or
    :meth:`transform` are treated as pre-sample values, so a series of
    length ``n + order`` yields ``n`` residuals.

    Parameters
    ----------
    order : int, default=1
    mean_method : {"mean", "median"}, default="mean"
    beta_method : {"ls", "huber"}, default="ls"

    Attributes
    ----------
    mu_ : float
    coef_ : ndarray of shape (order,)
    delta_ : float
        ``1 - coef_.sum()``.
    """

    def __init__(self, order=1, mean_method="mean", beta_method="ls"):
        self.order = order
        self.mean_method = mean_method
        self.beta_method = beta_method

    def fit(self, X, y=None):
        p = check_order(self.order)
        series = check_series(X, p)
        self.mu_ = estimate_mean(series, p, self.mean_method)
        self.coef_ = estimate_beta(series - self.mu_, p, self.beta_method)
        self.delta_ = float(1.0 - self.coef_.sum())
        self.fit_ = compute_residuals(series, self.mu_, self.coef_)
        return self

    def transform(self, X):
        check_is_fitted(self, "coef_")
        series = check_series(X, self.order)
        return compute_residuals(series, self.mu_, self.coef_).residuals


class SymmetrizedPearsonTest(BaseEstimator):
    """Symmetrized Pearson chi-square test for normality of AR innovations.

    Parameters
    ----------
    order : int, default=1
        Autoregression order ``p``.
    n_cells : int, default=5
        Number of symmetric cells ``m``; must exceed 2.
    alpha : float, default=0.05
        Asymptotic level.
    partition : None, "auto", sequence of float or Partition, default=None
        Positive finite cell boundaries.  ``None`` anchors an equiprobable
        partition on the MAD scale of the residuals.
    mean_method, beta_method : str
        Passed to :class:`ARResidualizer`.

    Attributes
    ----------
    report_ : TestReport
    statistic_, theta_, threshold_, pvalue_ : float
    reject_ : bool
    counts_ : ndarray of shape (n_cells,)
    residualizer_ : ARResidualizer
    """

    def __init__(self, order=1, n_cells=5, alpha=0.05, partition=None,
                 mean_method="mean", beta_method="ls"):
        self.order = order
        self.n_cells = n_cells
        self.alpha = alpha
        self.partition = partition
        self.mean_method = mean_method
        self.beta_method = beta_method

    def fit(self, X, y=None):
        m = check_cells(self.n_cells)
        alpha = check_alpha(self.alpha)
        partition = check_partition(self.partition, m)
        res = ARResidualizer(self.order, self.mean_method, self.beta_method).fit(X)
        rep = residual_test(res.fit_.residuals, m=m, alpha=alpha, partition=partition)
        self.residualizer_ = res
        self.report_ = TestReport(
            counts=rep.counts, theta_hat=rep.theta_hat, statistic=rep.statistic, dof=rep.dof,
            threshold=rep.threshold, alpha=alpha, reject=rep.reject, partition=rep.partition,
            fit=res.fit_)
        self.statistic_ = rep.statistic
        self.theta_ = rep.theta_hat
        self.threshold_ = rep.threshold
        self.pvalue_ = rep.pvalue
        self.reject_ = rep.reject
        self.counts_ = np.asarray(rep.counts.nu)
        return self

    def test(self, X) -> TestReport:
        """Fit on ``X`` and return the full report."""
        return self.fit(X).report_
