"""Removal of deterministic components under cases D0/D1/D2, by OLS or GLS.

Case D0 has no deterministics, D1 an intercept, D2 an intercept plus linear
trend. GLS detrending quasi-differences the data at rho_bar = 1 + c_bar/T
(keeping the first observation in levels) before fitting the deterministic
coefficients, then subtracts the fitted deterministic part from the levels.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from vrcoint.core import least_squares
from vrcoint.exceptions import (
    DimensionMismatchError,
    InvalidCaseError,
    PureDifferencingWarning,
)


class Case(enum.Enum):
    """Deterministic specification: none, intercept, or intercept plus trend."""

    D0 = "d0"
    D1 = "d1"
    D2 = "d2"

    @property
    def n_deterministic(self) -> int:
        return {Case.D0: 0, Case.D1: 1, Case.D2: 2}[self]

    @classmethod
    def parse(cls, text: str) -> "Case":
        return cls(text.strip().lower())


@dataclass(frozen=True)
class DetrendMode:
    """OLS detrending, or GLS detrending with quasi-differencing constant c_bar."""

    kind: str  # "ols" | "gls"
    c_bar: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("ols", "gls"):
            raise ValueError(f"unknown detrend kind {self.kind!r}")
        if self.kind == "gls":
            if self.c_bar is None:
                raise ValueError("GLS detrending requires c_bar")
            if self.c_bar > 0:
                raise ValueError(f"c_bar must be nonpositive, got {self.c_bar}")
        elif self.c_bar is not None:
            raise ValueError("c_bar is only meaningful for GLS detrending")

    @classmethod
    def ols(cls) -> "DetrendMode":
        return cls("ols")

    @classmethod
    def gls(cls, c_bar: float) -> "DetrendMode":
        return cls("gls", float(c_bar))

    @property
    def is_gls(self) -> bool:
        return self.kind == "gls"

    def label(self) -> str:
        return "gls" if self.is_gls else "ols"


def deterministic_regressors(case: Case, T: int) -> np.ndarray:
    """Deterministic regressor matrix: T x 0 (D0), ones (D1), or [1, t] (D2)."""
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    if case is Case.D0:
        return np.empty((T, 0))
    ones = np.ones(T)
    if case is Case.D1:
        return ones[:, None]
    trend = np.arange(1, T + 1, dtype=float)
    return np.column_stack([ones, trend])


def ols_detrend(z: np.ndarray, case: Case) -> np.ndarray:
    """Residuals of each column of ``z`` after OLS projection on the deterministics.

    Case D0 returns the data unchanged.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if z.shape[0] == 1 and z.shape[1] > 1:
        raise DimensionMismatchError("z must have observations along axis 0")
    if case is Case.D0:
        return z.copy()
    d = deterministic_regressors(case, z.shape[0])
    _, residuals = least_squares(d, z)
    return residuals


def gls_detrend(z: np.ndarray, case: Case, c_bar: float) -> np.ndarray:
    """GLS-detrended data: levels minus the quasi-difference deterministic fit.

    With rho_bar = 1 + c_bar/T, the stacked regressor is
    [d_1, d_2 - rho_bar*d_1, ..., d_T - rho_bar*d_{T-1}] and likewise for the
    data; the first rows stay in levels, which anchors the fit. The estimated
    coefficients are applied to the level deterministics.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if case is Case.D0:
        raise InvalidCaseError("GLS detrending is undefined without deterministics (D0)")
    if c_bar > 0:
        raise ValueError(f"c_bar must be nonpositive, got {c_bar}")
    if c_bar == 0:
        warnings.warn(
            "c_bar = 0 collapses GLS detrending to pure differencing with a level anchor",
            PureDifferencingWarning,
            stacklevel=2,
        )
    T = z.shape[0]
    if T < 3:
        raise DimensionMismatchError(f"GLS detrending needs T >= 3, got {T}")
    rho_bar = 1.0 + c_bar / T
    d = deterministic_regressors(case, T)
    d_q = d.copy()
    d_q[1:] = d[1:] - rho_bar * d[:-1]
    z_q = z.copy()
    z_q[1:] = z[1:] - rho_bar * z[:-1]
    coef, _ = least_squares(d_q, z_q)
    return z - d @ coef


def detrend(z: np.ndarray, case: Case, mode: DetrendMode) -> np.ndarray:
    """Apply the requested detrending to every column of ``z``."""
    if mode.is_gls:
        return gls_detrend(z, case, mode.c_bar)
    return ols_detrend(z, case)
