"""Test statistics and their tuning machinery.

Implements the variance ratio statistic (tuning free), the augmented
Dickey-Fuller t statistic, the MSB statistic, and the Z-alpha statistic,
together with lag selection by information criteria (AIC/BIC and their
modified versions) and kernel long-run variance estimation with the
quadratic spectral or Bartlett kernel and an automatic AR(1) plug-in
bandwidth.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from vrcoint.core import least_squares, partial_sums
from vrcoint.detrend import Case, DetrendMode
from vrcoint.exceptions import (
    DegenerateResidualsError,
    InvalidCaseError,
    NearSingularARSumError,
    NonpositiveLongRunVarianceWarning,
    SampleTooSmallError,
)
from vrcoint.residuals import cointegrating_residuals

AR_SUM_TOL = 1e-6
RHO_CLAMP = 0.97


class TestKind(enum.Enum):
    __test__ = False  # not a pytest suite despite the name

    VR = "vr"
    ADF = "adf"
    MSB = "msb"
    ZALPHA = "zalpha"

    @classmethod
    def parse(cls, text: str) -> "TestKind":
        return cls(text.strip().lower())


class Criterion(enum.Enum):
    AIC = "aic"
    BIC = "bic"
    MAIC = "maic"
    MBIC = "mbic"

    @classmethod
    def parse(cls, text: str) -> "Criterion":
        return cls(text.strip().lower())

    @property
    def is_modified(self) -> bool:
        return self in (Criterion.MAIC, Criterion.MBIC)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel and bandwidth choice for the long-run variance estimator.

    ``bandwidth`` is either the string ``"andrews"`` (AR(1) plug-in rule) or a
    fixed positive number.
    """

    kernel: str = "qs"  # "qs" | "bartlett"
    bandwidth: str | float = "andrews"

    def __post_init__(self) -> None:
        if self.kernel not in ("qs", "bartlett"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "andrews":
                raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif self.bandwidth < 0:
            raise ValueError("fixed bandwidth must be nonnegative")

    def weight(self, x: np.ndarray | float) -> np.ndarray | float:
        if self.kernel == "qs":
            return qs_kernel(x)
        return bartlett_kernel(x)


@dataclass(frozen=True)
class LagSelection:
    criterion: Criterion
    p_max: int
    chosen_p: int
    values: tuple[float, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class TestStatistic:
    __test__ = False  # not a pytest suite despite the name

    kind: TestKind
    value: float
    settings: dict


def vr_statistic(u_hat: np.ndarray) -> float:
    """Variance ratio: [T^-2 * sum of squared partial sums] / [sum of squares]."""
    u = np.asarray(u_hat, dtype=float).ravel()
    T = u.shape[0]
    if T < 2:
        raise SampleTooSmallError(f"variance ratio needs T >= 2, got {T}")
    denom = float(np.sum(u**2))
    if denom <= 0.0:
        raise DegenerateResidualsError("residual sum of squares is zero")
    num = float(np.sum(partial_sums(u) ** 2)) / T**2
    return num / denom


def _adf_design(u: np.ndarray, p: int, start: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Response and regressors of the lag-p auxiliary regression on t = start+2..T.

    ``start`` is the number of observations dropped from the front (p for the
    statistic itself, p_max when criteria are evaluated on a common sample).
    """
    T = u.shape[0]
    du = np.diff(u)
    idx = np.arange(start, T - 1)
    if idx.size <= p + 1:
        raise SampleTooSmallError(f"T={T} too small for lag order p={p}")
    y = du[idx]
    cols = [u[idx]] + [du[idx - j] for j in range(1, p + 1)]
    return y, np.column_stack(cols), u[idx]


def _adf_fit(u: np.ndarray, p: int, start: int) -> dict:
    """OLS fit of the auxiliary regression plus the pieces the statistics need."""
    y, X, u_lag = _adf_design(u, p, start)
    coef, resid = least_squares(X, y)
    n, k = X.shape
    rss = float(np.sum(resid**2))
    s2 = rss / (n - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    se_b0 = math.sqrt(s2 * xtx_inv[0, 0])
    return {
        "b0": float(coef[0]),
        "se_b0": se_b0,
        "pi_sum": float(np.sum(coef[1:])),
        "rss": rss,
        "nobs": n,
        "sum_u_lag_sq": float(np.sum(u_lag**2)),
    }


def adf_statistic(u_hat: np.ndarray, p: int) -> float:
    """t statistic on the level coefficient in the lag-p auxiliary regression."""
    u = np.asarray(u_hat, dtype=float).ravel()
    if u.shape[0] < p + 4:
        raise SampleTooSmallError(f"T={u.shape[0]} too small for lag order p={p}")
    fit = _adf_fit(u, p, start=p)
    return fit["b0"] / fit["se_b0"]


def msb_statistic(u_hat: np.ndarray, p: int) -> float:
    """MSB statistic: sqrt(T^-2 * sum(u^2) / s^2) with the AR-adjusted variance s^2."""
    u = np.asarray(u_hat, dtype=float).ravel()
    T = u.shape[0]
    if T < p + 4:
        raise SampleTooSmallError(f"T={T} too small for lag order p={p}")
    fit = _adf_fit(u, p, start=p)
    one_minus_pi = 1.0 - fit["pi_sum"]
    if abs(one_minus_pi) <= AR_SUM_TOL:
        raise NearSingularARSumError(
            f"1 - sum(pi_j) = {one_minus_pi:.2e} is too close to zero"
        )
    s2_rp = fit["rss"] / T
    s2 = s2_rp / one_minus_pi**2
    return math.sqrt(np.sum(u**2) / T**2 / s2)


def qs_kernel(x: np.ndarray | float) -> np.ndarray | float:
    """Quadratic spectral kernel, with the continuous extension K(0) = 1."""
    x = np.asarray(x, dtype=float)
    z = 6.0 * np.pi * x / 5.0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 25.0 / (12.0 * np.pi**2 * x**2) * (np.sin(z) / z - np.cos(z))
    out = np.where(x == 0.0, 1.0, out)
    return out if out.ndim else float(out)


def bartlett_kernel(x: np.ndarray | float) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(x))
    return out if out.ndim else float(out)


def andrews_bandwidth(k_hat: np.ndarray, kernel: KernelSpec) -> float:
    """AR(1) plug-in bandwidth: fit rho on k_hat, map through the kernel constants.

    rho is clamped to [-0.97, 0.97]; rho = 0 yields bandwidth 0, in which case
    the weighted autocovariance sum is empty.
    """
    k = np.asarray(k_hat, dtype=float).ravel()
    n = k.shape[0]
    if n < 4:
        raise SampleTooSmallError(f"bandwidth selection needs at least 4 values, got {n}")
    den = float(np.sum(k[:-1] ** 2))
    if den <= 0.0:
        raise DegenerateResidualsError("cannot fit AR(1): zero variation")
    rho = float(np.sum(k[1:] * k[:-1])) / den
    rho = min(max(rho, -RHO_CLAMP), RHO_CLAMP)
    if kernel.kernel == "qs":
        alpha2 = 4.0 * rho**2 / (1.0 - rho) ** 4
        return 1.3221 * (alpha2 * n) ** 0.2
    alpha1 = 4.0 * rho**2 / ((1.0 - rho) ** 2 * (1.0 + rho) ** 2)
    return 1.1447 * (alpha1 * n) ** (1.0 / 3.0)


def zalpha_statistic(
    u_hat: np.ndarray, kernel: KernelSpec | None = None
) -> tuple[float, dict]:
    """Z-alpha statistic and a record of the resolved kernel settings.

    The first-order autoregression has no intercept (the residuals are already
    detrended). A nonpositive kernel long-run variance is reported in the
    returned settings and the computation proceeds; aborting would break Monte
    Carlo loops, and the QS weights can produce this in tiny samples.
    """
    u = np.asarray(u_hat, dtype=float).ravel()
    T = u.shape[0]
    if T < 4:
        raise SampleTooSmallError(f"Z-alpha needs T >= 4, got {T}")
    kernel = kernel or KernelSpec()
    den = float(np.sum(u[:-1] ** 2))
    if den <= 0.0:
        raise DegenerateResidualsError("residual sum of squares is zero")
    alpha = float(np.sum(u[1:] * u[:-1])) / den
    k = u[1:] - alpha * u[:-1]
    n = T - 1
    s2_k = float(np.sum(k**2)) / n
    if kernel.bandwidth == "andrews":
        b_T = andrews_bandwidth(k, kernel)
    else:
        b_T = float(kernel.bandwidth)
    gamma_sum = 0.0
    for h in range(1, int(math.floor(b_T)) + 1):
        gamma_sum += float(kernel.weight(h / b_T)) * float(np.sum(k[h:] * k[:-h]))
    s2_lr = s2_k + 2.0 / n * gamma_sum
    nonpositive_lrv = s2_lr <= 0.0
    if nonpositive_lrv:
        warnings.warn(
            f"kernel long-run variance {s2_lr:.3e} is nonpositive",
            NonpositiveLongRunVarianceWarning,
            stacklevel=2,
        )
    value = n * (alpha - 1.0) - 0.5 * (s2_lr - s2_k) * n**2 / den
    info = {
        "kernel": kernel.kernel,
        "bandwidth": b_T,
        "bandwidth_rule": kernel.bandwidth if isinstance(kernel.bandwidth, str) else "fixed",
        "nonpositive_lrv": nonpositive_lrv,
    }
    return value, info


def default_pmax(T: int) -> int:
    """Default lag order bound floor(12 * (T/100)^(1/4))."""
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    return int(math.floor(12.0 * (T / 100.0) ** 0.25))


def criterion_values(u_hat: np.ndarray, criterion: Criterion, p_max: int) -> list[float]:
    """Information criterion values for p = 0..p_max on the common sample.

    Every candidate regression is evaluated on t = p_max+2..T so the criteria
    compare like with like. Non-finite values are returned as inf so they are
    never selected.
    """
    u = np.asarray(u_hat, dtype=float).ravel()
    T = u.shape[0]
    if T <= p_max + 3:
        raise SampleTooSmallError(f"T={T} too small for p_max={p_max}")
    n_eff = T - p_max
    values: list[float] = []
    for p in range(p_max + 1):
        fit = _adf_fit(u, p, start=p_max)
        s2_over_T = fit["rss"] / T
        sigma2 = fit["rss"] / n_eff
        if s2_over_T <= 0.0 or sigma2 <= 0.0:
            values.append(math.inf)
            continue
        if criterion is Criterion.AIC:
            val = math.log(s2_over_T) + 2.0 * p / T
        elif criterion is Criterion.BIC:
            val = math.log(s2_over_T) + p * math.log(T) / T
        else:
            tau = fit["b0"] ** 2 * fit["sum_u_lag_sq"] / sigma2
            if criterion is Criterion.MAIC:
                val = math.log(sigma2) + 2.0 * (p + tau) / n_eff
            else:
                val = math.log(sigma2) + math.log(n_eff) * (p + tau) / n_eff
        values.append(val if math.isfinite(val) else math.inf)
    return values


def select_lag(u_hat: np.ndarray, criterion: Criterion, p_max: int) -> LagSelection:
    """Smallest minimizer of the criterion over p = 0..p_max."""
    values = criterion_values(u_hat, criterion, p_max)
    best = int(np.argmin(values))  # argmin takes the first, i.e. smallest p, on ties
    return LagSelection(criterion=criterion, p_max=p_max, chosen_p=best, values=tuple(values))


def run_test(
    y: np.ndarray,
    X: np.ndarray,
    case: Case,
    mode: DetrendMode,
    kind: TestKind,
    criterion: Criterion = Criterion.AIC,
    p: int | None = None,
    p_max: int | None = None,
    kernel: KernelSpec | None = None,
) -> TestStatistic:
    """Full pipeline: detrend, cointegrating residuals, tuning, statistic.

    For the modified criteria the lag order is always selected on OLS-detrended
    residuals, even when the statistic itself uses GLS-detrended residuals.
    Every resolved setting is echoed in ``TestStatistic.settings``.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    T, m = X.shape
    res = cointegrating_residuals(y, X, case, mode)
    if res.is_degenerate:
        raise DegenerateResidualsError(
            "residuals are numerically zero: the series are exactly cointegrated"
        )
    settings: dict = {
        "case": case.value,
        "detrend": mode.label(),
        "c_bar": mode.c_bar,
        "m": m,
        "T": T,
    }
    if kind is TestKind.VR:
        value = vr_statistic(res.u_hat)
        return TestStatistic(kind, value, settings)
    if kind is TestKind.ZALPHA:
        if mode.is_gls:
            raise InvalidCaseError("Z-alpha is only defined for OLS detrending")
        value, info = zalpha_statistic(res.u_hat, kernel)
        settings.update(info)
        return TestStatistic(kind, value, settings)
    # ADF / MSB: resolve the lag order first.
    if p is None:
        p_max = default_pmax(T) if p_max is None else p_max
        if criterion.is_modified and mode.is_gls:
            lag_res = cointegrating_residuals(y, X, case, DetrendMode.ols())
        else:
            lag_res = res
        selection = select_lag(lag_res.u_hat, criterion, p_max)
        p = selection.chosen_p
        settings.update({"criterion": criterion.value, "p_max": p_max, "p": p})
    else:
        settings.update({"criterion": "fixed", "p_max": p_max, "p": p})
    if kind is TestKind.ADF:
        value = adf_statistic(res.u_hat, p)
    elif kind is TestKind.MSB:
        value = msb_statistic(res.u_hat, p)
    else:
        raise ValueError(f"unknown test kind {kind!r}")
    return TestStatistic(kind, value, settings)
