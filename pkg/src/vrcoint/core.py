"""Shared numeric primitives: least squares, partial sums, quantiles, RNG streams.

All functions are pure and operate on plain numpy arrays, so they are safe to
call from any number of worker processes at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vrcoint.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    RankDeficientError,
)

# Singular values below RANK_RTOL * largest singular value count as zero.
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """Counter-based random source keyed by (seed, stream_id).

    Built on the Philox generator, so the draw sequence depends only on the
    key pair: the same (seed, stream_id) yields bit-identical draws no matter
    how many other streams are consumed in parallel. Use one stream per Monte
    Carlo replication and never share a stream between replications.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of the stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, offset: int) -> "RngStream":
        """Stream with the same seed and stream_id shifted by ``offset``."""
        return RngStream(self.seed, self.stream_id + offset)


def least_squares(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve min ||y - X b|| by SVD and return (coefficients, residuals).

    Parameters
    ----------
    X : ndarray, shape (T, k)
        Regressor matrix, full column rank required.
    y : ndarray, shape (T,) or (T, q)
        Response vector or matrix (one solve per column).

    Returns
    -------
    coefficients : ndarray, shape (k,) or (k, q)
    residuals : ndarray, same shape as ``y``

    Raises
    ------
    DimensionMismatchError
        If row counts disagree or T <= k.
    RankDeficientError
        If the effective rank of ``X`` is below its column count.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatchError(f"regressor matrix must be 2-d, got ndim={X.ndim}")
    T, k = X.shape
    if y.shape[0] != T:
        raise DimensionMismatchError(f"X has {T} rows but y has {y.shape[0]}")
    if T <= k:
        raise DimensionMismatchError(f"need more observations than regressors (T={T}, k={k})")
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=RANK_RTOL)
    if rank < k:
        raise RankDeficientError(f"effective rank {rank} < {k} regressors")
    residuals = y - X @ coef
    return coef, residuals


def partial_sums(v: np.ndarray) -> np.ndarray:
    """Cumulative sums: output[t] = v[0] + ... + v[t]."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise EmptyInputError("partial_sums of empty vector")
    return np.cumsum(v, axis=0)


def empirical_quantile(draws: np.ndarray, level: float) -> float:
    """Lower empirical quantile: the ceil(level*N)-th order statistic.

    No interpolation is applied. For left-tailed tests this is conservative:
    the reported critical value is never above the interpolated one.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.size == 0:
        raise EmptyInputError("empirical_quantile of empty vector")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    n = draws.size
    k = int(np.ceil(level * n))
    return float(np.sort(draws, axis=None)[k - 1])
