"""Nonparametric variance-ratio no-cointegration testing.

A library and command line tool for residuals-based no-cointegration tests
(variance ratio, ADF, MSB, Z-alpha) under OLS or GLS detrending, plus the
Monte Carlo machinery to tabulate their nonstandard limiting distributions,
calibrate the GLS quasi-differencing constant, and run finite-sample size and
power experiments.
"""

from vrcoint.core import RngStream, empirical_quantile, least_squares, partial_sums
from vrcoint.detrend import Case, DetrendMode, deterministic_regressors, gls_detrend, ols_detrend
from vrcoint.dgp import DgpConfig, ShortRunDynamics, generate_sample, large_u0, longrun_covariance
from vrcoint.residuals import ResidualSeries, cointegrating_residuals
from vrcoint.statistics import (
    Criterion,
    KernelSpec,
    LagSelection,
    TestKind,
    TestStatistic,
    adf_statistic,
    andrews_bandwidth,
    bartlett_kernel,
    default_pmax,
    msb_statistic,
    qs_kernel,
    run_test,
    select_lag,
    vr_statistic,
    zalpha_statistic,
)
from vrcoint.tables import QuantileTable, default_c_bar, load_packaged_table

__version__ = "0.1.0"

__all__ = [
    "Case",
    "Criterion",
    "DetrendMode",
    "DgpConfig",
    "KernelSpec",
    "LagSelection",
    "QuantileTable",
    "ResidualSeries",
    "RngStream",
    "ShortRunDynamics",
    "TestKind",
    "TestStatistic",
    "adf_statistic",
    "andrews_bandwidth",
    "bartlett_kernel",
    "cointegrating_residuals",
    "default_c_bar",
    "default_pmax",
    "deterministic_regressors",
    "empirical_quantile",
    "generate_sample",
    "gls_detrend",
    "large_u0",
    "least_squares",
    "load_packaged_table",
    "longrun_covariance",
    "msb_statistic",
    "ols_detrend",
    "partial_sums",
    "qs_kernel",
    "run_test",
    "select_lag",
    "vr_statistic",
    "zalpha_statistic",
]
