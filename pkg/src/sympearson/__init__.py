"""Symmetrized Pearson chi-square test for normality of AR(p) innovations
observed with sporadic gross errors."""

from .ar_process import ARModelSpec, ObservedSample, ScenarioSpec, check_stationary, simulate
from .asymptotics import (
    AsymptoticContext,
    asymptotic_power,
    noncentrality,
    robustness_bound,
    shift_vector,
)
from .distributions import (
    DiscretePi,
    LogisticH,
    NormalH,
    NormalMixtureH,
    NormalPi,
    NormalScale,
    PointMassPi,
    UniformPi,
)
from .estimation import FitResult, fit_ar
from .estimator import ARResidualizer, SymmetrizedPearsonTest
from .mc_harness import ExperimentConfig, check_clt_nu, check_expansion, run_power
from .pearson_test import Partition, TestReport, default_partition, null_partition, run_test

__version__ = "0.1.0"

__all__ = [
    "ARModelSpec", "ObservedSample", "ScenarioSpec", "check_stationary", "simulate",
    "AsymptoticContext", "asymptotic_power", "noncentrality", "robustness_bound", "shift_vector",
    "DiscretePi", "LogisticH", "NormalH", "NormalMixtureH", "NormalPi", "NormalScale",
    "PointMassPi", "UniformPi", "FitResult", "fit_ar", "ARResidualizer",
    "SymmetrizedPearsonTest", "ExperimentConfig", "check_clt_nu", "check_expansion",
    "run_power", "Partition", "TestReport", "default_partition", "null_partition", "run_test",
]
