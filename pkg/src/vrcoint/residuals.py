"""Cointegrating-regression residuals from detrended data.

The detrended left-hand variable is regressed on the detrended regressors
without any further deterministic terms (detrending already removed them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vrcoint.core import least_squares
from vrcoint.detrend import Case, DetrendMode, detrend
from vrcoint.exceptions import SampleTooSmallError


@dataclass(frozen=True)
class ResidualSeries:
    """Residuals u_hat and slope estimate beta_hat of the cointegrating regression.

    ``response_ss`` is the sum of squares of the detrended response, kept as a
    scale reference to recognize numerically degenerate (exactly cointegrated)
    residuals.
    """

    u_hat: np.ndarray
    beta_hat: np.ndarray
    case: Case
    mode: DetrendMode
    response_ss: float = 0.0

    @property
    def T(self) -> int:
        return self.u_hat.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return float(np.sum(self.u_hat**2)) <= 1e-20 * self.response_ss


def cointegrating_residuals(
    y: np.ndarray, X: np.ndarray, case: Case, mode: DetrendMode
) -> ResidualSeries:
    """Detrend (y, X) jointly, regress detrended y on detrended X, keep residuals.

    Raises
    ------
    SampleTooSmallError
        If T <= m + p + 2 where p is the number of deterministic terms.
    RankDeficientError
        If the detrended regressors are collinear.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    T, m = X.shape
    if y.shape[0] != T:
        raise SampleTooSmallError(f"y has {y.shape[0]} rows but X has {T}")
    if T <= m + case.n_deterministic + 2:
        raise SampleTooSmallError(
            f"T={T} too small for m={m} regressors under {case.value}"
        )
    z = np.column_stack([y, X])
    z_tilde = detrend(z, case, mode)
    beta_hat, u_hat = least_squares(z_tilde[:, 1:], z_tilde[:, 0])
    return ResidualSeries(
        u_hat=u_hat,
        beta_hat=beta_hat,
        case=case,
        mode=mode,
        response_ss=float(np.sum(z_tilde[:, 0] ** 2)),
    )
