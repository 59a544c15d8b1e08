"""Simulation of the limiting distributions, critical values, and local power.

Standard Brownian motions are approximated by normalized partial sums of
``grid_n`` iid standard normal draws. The near-unit-root limit process is
built by the exact AR(1) recursion j[i] = exp(c/n) * j[i-1] + dB[i] applied to
the increments of the driver process, which has no discretization bias in the
mean-reversion term. All integrals are Riemann sums on the simulation grid;
running integrals are cumulative sums; stochastic integrals are forward Ito
sums using the left-endpoint value of the integrand.

Replications are independent units keyed by (seed, replication index), so any
partition of the replication range across workers yields bit-identical
results.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from vrcoint.core import RngStream, empirical_quantile
from vrcoint.detrend import Case, DetrendMode
from vrcoint.exceptions import (
    InvalidCaseError,
    InvalidConfigError,
    NoSolutionInRangeError,
    NumericalSingularityError,
)
from vrcoint.statistics import TestKind

# Candidate step for the quasi-differencing constant search, matching the
# precision at which the shipped constants are reported.
CBAR_STEP = 0.25
CBAR_SEARCH_RANGE = (-100.0, 0.0)
MAX_RESAMPLE_ROUNDS = 8


@dataclass(frozen=True)
class LimitSpec:
    """Full description of one limiting-distribution functional."""

    test: TestKind
    case: Case
    detrend: DetrendMode
    m: int = 1
    c: float = 0.0
    r_squared: float = 0.0
    grid_n: int = 10_000
    replications: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InvalidConfigError(f"m must be >= 1, got {self.m}")
        if self.c > 0:
            raise InvalidConfigError(f"c must be nonpositive, got {self.c}")
        if not 0.0 <= self.r_squared < 1.0:
            raise InvalidConfigError(f"r_squared must lie in [0, 1), got {self.r_squared}")
        if self.grid_n < 100:
            raise InvalidConfigError(f"grid_n must be >= 100, got {self.grid_n}")
        if self.detrend.is_gls and self.case is Case.D0:
            raise InvalidCaseError("GLS detrending is undefined in case D0")
        if self.test is TestKind.ZALPHA and self.detrend.is_gls:
            raise InvalidCaseError("the Z-alpha limit is only defined for OLS detrending")


@dataclass(frozen=True)
class PathBundle:
    """Discretized limit processes: driver-orthogonal BM, regressor BMs, OU path."""

    w_perp: np.ndarray  # (n,)
    w_v: np.ndarray  # (n, m)
    j_c: np.ndarray  # (n,)


def paths_from_normals(eps: np.ndarray, c: float, r_squared: float) -> PathBundle:
    """Build the path bundle from an (n, 1+m) matrix of standard normals.

    Column 0 drives the orthogonal component, the rest drive the regressors.
    The OU driver adds sqrt(r2/(1-r2)) times the averaged regressor motion.
    """
    n, width = eps.shape
    m = width - 1
    incr = eps / math.sqrt(n)
    w = np.cumsum(incr, axis=0)
    db = incr[:, 0]
    if r_squared > 0.0:
        load = math.sqrt(r_squared / (1.0 - r_squared))
        db = db + load * incr[:, 1:].sum(axis=1) / math.sqrt(m)
    j = lfilter([1.0], [1.0, -math.exp(c / n)], db)
    return PathBundle(w_perp=w[:, 0], w_v=w[:, 1:], j_c=j)


def simulate_paths(spec: LimitSpec, rng: RngStream) -> PathBundle:
    """Draw the normals for one replication and build its path bundle."""
    eps = rng.generator().standard_normal((spec.grid_n, 1 + spec.m))
    return paths_from_normals(eps, spec.c, spec.r_squared)


def detrend_path(path: np.ndarray, case: Case) -> np.ndarray:
    """Continuous-time detrending of a path (or columns of paths) on the grid.

    D1 subtracts the Riemann mean; D2 subtracts the projection on (1, r) in
    the closed two-term form (4-6r) and (12r-6) against the level and
    r-weighted means.
    """
    path = np.asarray(path, dtype=float)
    if case is Case.D0:
        return path
    if case is Case.D1:
        return path - path.mean(axis=0)
    n = path.shape[0]
    r = np.arange(1, n + 1) / n
    level = path.mean(axis=0)
    slope = (path * (r[:, None] if path.ndim > 1 else r)).mean(axis=0)
    if path.ndim > 1:
        return path - np.outer(4.0 - 6.0 * r, level) - np.outer(12.0 * r - 6.0, slope)
    return path - (4.0 - 6.0 * r) * level - (12.0 * r - 6.0) * slope


def _detrended_at_zero(path: np.ndarray, case: Case) -> np.ndarray | float:
    """Value of the detrended path at r = 0 (the raw path starts at zero)."""
    if case is Case.D0:
        return 0.0 * path[0]
    if case is Case.D1:
        return -path.mean(axis=0)
    n = path.shape[0]
    r = np.arange(1, n + 1) / n
    slope = (path * (r[:, None] if path.ndim > 1 else r)).mean(axis=0)
    return -4.0 * path.mean(axis=0) + 6.0 * slope


def gls_lambda(c_bar: float) -> float:
    """Weight on the endpoint in the trend coefficient of the GLS limit."""
    return (1.0 - c_bar) / (1.0 - c_bar + c_bar**2 / 3.0)


def _gls_transform(path: np.ndarray, case: Case, c_bar: float) -> np.ndarray:
    """Limit counterpart of GLS detrending: identity in D1, endpoint-weighted
    linear-trend removal in D2."""
    if case is Case.D1:
        return path
    n = path.shape[0]
    r = np.arange(1, n + 1) / n
    lam = gls_lambda(c_bar)
    slope = (path * (r[:, None] if path.ndim > 1 else r)).mean(axis=0)
    coef = lam * path[-1] + 3.0 * (1.0 - lam) * slope
    return path - (np.outer(r, coef) if path.ndim > 1 else r * coef)


def _limit_ingredients(bundle: PathBundle, spec: LimitSpec) -> dict:
    """Detrended paths, projection pieces, and (lazily used) Ito increments."""
    if spec.detrend.is_gls:
        jt = _gls_transform(bundle.j_c, spec.case, spec.detrend.c_bar)
        wvt = _gls_transform(bundle.w_v, spec.case, spec.detrend.c_bar)
        jt0 = 0.0
        wvt0 = np.zeros(spec.m)
    else:
        jt = detrend_path(bundle.j_c, spec.case)
        wvt = detrend_path(bundle.w_v, spec.case)
        jt0 = _detrended_at_zero(bundle.j_c, spec.case)
        wvt0 = np.atleast_1d(_detrended_at_zero(bundle.w_v, spec.case))
    gram = wvt.T @ wvt
    try:
        b = np.linalg.solve(gram, wvt.T @ jt)
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularityError("regressor paths are singular on the grid") from exc
    if not np.all(np.isfinite(b)):
        raise NumericalSingularityError("regressor paths are singular on the grid")
    resid = jt - wvt @ b
    return {"jt": jt, "wvt": wvt, "jt0": jt0, "wvt0": wvt0, "b": b, "resid": resid}


def _vr_value(resid: np.ndarray) -> float:
    n = resid.shape[0]
    num = float(np.sum(np.cumsum(resid) ** 2)) / n**2
    return num / float(np.sum(resid**2))


def _competitor_values(
    bundle: PathBundle, spec: LimitSpec, parts: dict, tests: list[TestKind]
) -> dict[TestKind, float]:
    """ADF / MSB / Z-alpha limit draws from the shared ingredients."""
    n, m = spec.grid_n, spec.m
    kappa = np.concatenate(([1.0], -parts["b"]))
    stacked = np.column_stack([parts["jt"], parts["wvt"]])
    a_mat = stacked.T @ stacked / n
    k_a_k = float(kappa @ a_mat @ kappa)
    load2 = spec.r_squared / (1.0 - spec.r_squared)
    delta = math.sqrt(load2 / m) * np.ones(m)
    k_d_k = float(
        (1.0 + load2) * kappa[0] ** 2
        + 2.0 * kappa[0] * delta @ kappa[1:]
        + kappa[1:] @ kappa[1:]
    )
    out: dict[TestKind, float] = {}
    if TestKind.MSB in tests and not (TestKind.ADF in tests or TestKind.ZALPHA in tests):
        out[TestKind.MSB] = math.sqrt(k_a_k / k_d_k)
        return out
    # Forward Ito sums need the integrand at the left endpoints (r = 0 row
    # prepended) and the raw increments of the stacked driver process.
    row0 = np.concatenate((np.atleast_1d(parts["jt0"]), parts["wvt0"]))
    lagged = np.vstack([row0, stacked[:-1]])
    d_driver = np.diff(_driver_path(bundle, spec), prepend=0.0)
    d_wv = np.diff(bundle.w_v, axis=0, prepend=np.zeros((1, m)))
    increments = np.column_stack([d_driver, d_wv])
    b_mat = lagged.T @ increments
    k_b_k = float(kappa @ b_mat @ kappa)
    if TestKind.ADF in tests:
        out[TestKind.ADF] = spec.c * math.sqrt(k_a_k / k_d_k) + k_b_k / math.sqrt(k_d_k * k_a_k)
    if TestKind.ZALPHA in tests:
        out[TestKind.ZALPHA] = spec.c + k_b_k / k_a_k
    if TestKind.MSB in tests:
        out[TestKind.MSB] = math.sqrt(k_a_k / k_d_k)
    return out


def _driver_path(bundle: PathBundle, spec: LimitSpec) -> np.ndarray:
    """OU driver path: orthogonal BM plus the loaded average regressor BM."""
    if spec.r_squared == 0.0:
        return bundle.w_perp
    load = math.sqrt(spec.r_squared / (1.0 - spec.r_squared))
    return bundle.w_perp + load * bundle.w_v.sum(axis=1) / math.sqrt(spec.m)


def draws_from_bundle(
    bundle: PathBundle, spec: LimitSpec, tests: list[TestKind]
) -> dict[TestKind, float]:
    """Limit draws of several tests computed from one simulated bundle."""
    parts = _limit_ingredients(bundle, spec)
    out: dict[TestKind, float] = {}
    competitors = [t for t in tests if t is not TestKind.VR]
    if TestKind.VR in tests:
        out[TestKind.VR] = _vr_value(parts["resid"])
    if competitors:
        out.update(_competitor_values(bundle, spec, parts, competitors))
    return out


def limit_vr_draw(spec: LimitSpec, rng: RngStream) -> float:
    """One draw from the variance-ratio limit distribution."""
    bundle = simulate_paths(spec, rng)
    return draws_from_bundle(bundle, spec, [TestKind.VR])[TestKind.VR]


def limit_competitor_draw(spec: LimitSpec, rng: RngStream) -> float:
    """One draw from the ADF, MSB, or Z-alpha limit distribution."""
    if spec.test is TestKind.VR:
        raise ValueError("use limit_vr_draw for the variance ratio")
    bundle = simulate_paths(spec, rng)
    return draws_from_bundle(bundle, spec, [spec.test])[spec.test]


def _chunk_draws(args: tuple) -> tuple[np.ndarray, int]:
    """Worker: draws for replication indices [start, stop), resampling singular
    replications at deterministically shifted stream ids."""
    spec, tests, start, stop = args
    values = np.empty((stop - start, len(tests)))
    resamples = 0
    for i, rep in enumerate(range(start, stop)):
        shift = 0
        while True:
            rng = RngStream(spec.seed, rep + shift * spec.replications)
            try:
                bundle = simulate_paths(spec, rng)
                draws = draws_from_bundle(bundle, spec, tests)
                break
            except NumericalSingularityError:
                shift += 1
                resamples += 1
                if shift > MAX_RESAMPLE_ROUNDS:
                    raise
        values[i] = [draws[t] for t in tests]
    return values, resamples


def simulate_draw_matrix(
    spec: LimitSpec, tests: list[TestKind], workers: int = 1
) -> tuple[np.ndarray, int]:
    """(replications x len(tests)) draw matrix, deterministic in (seed, rep).

    The result is identical for any worker count because replications are
    keyed by index and merged in index order.
    """
    reps = spec.replications
    if workers <= 1 or reps < 2 * workers:
        return _chunk_draws((spec, tests, 0, reps))
    bounds = np.linspace(0, reps, workers + 1, dtype=int)
    chunks = [(spec, tests, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_chunk_draws, chunks))
    values = np.vstack([v for v, _ in results])
    return values, sum(r for _, r in results)


def simulate_null_draws(
    tests: list[TestKind],
    case: Case,
    detrend: DetrendMode,
    m: int,
    replications: int,
    grid_n: int,
    seed: int,
    workers: int = 1,
) -> dict[TestKind, np.ndarray]:
    """Null draws (c = 0, r_squared = 0) for several tests sharing one path set.

    The null limit is free of the long-run correlation, so r_squared = 0 is
    used; any other value would give the same distribution at extra cost.
    """
    if detrend.is_gls and TestKind.ZALPHA in tests:
        raise InvalidCaseError("the Z-alpha limit is only defined for OLS detrending")
    spec = LimitSpec(
        test=tests[0], case=case, detrend=detrend, m=m, c=0.0, r_squared=0.0,
        grid_n=grid_n, replications=replications, seed=seed,
    )
    values, _ = simulate_draw_matrix(spec, tests, workers=workers)
    return {t: values[:, i] for i, t in enumerate(tests)}


def tabulate_critical_values(
    test: TestKind,
    case: Case,
    detrend: DetrendMode,
    m_list: list[int],
    levels: list[float],
    replications: int,
    grid_n: int,
    seed: int,
    workers: int = 1,
):
    """Empirical null quantiles for one test across regressor counts.

    Returns a :class:`vrcoint.tables.QuantileTable` carrying full provenance.
    """
    from vrcoint.tables import QuantileTable, TableRow  # deferred: tables is a leaf module

    if replications < 1000:
        raise InvalidConfigError("tabulation needs at least 1000 replications")
    rows = []
    for m in m_list:
        draws = simulate_null_draws(
            [test], case, detrend, m, replications, grid_n, seed, workers
        )[test]
        for level in levels:
            rows.append(
                TableRow(
                    test=test.value,
                    case=case.value,
                    detrend=detrend.label(),
                    m=m,
                    level=level,
                    value=empirical_quantile(draws, level),
                    replications=replications,
                    grid_n=grid_n,
                    seed=seed,
                )
            )
    return QuantileTable(rows)


def local_power_curve(
    test: TestKind,
    case: Case,
    detrend: DetrendMode,
    m: int,
    r_squared: float,
    c_grid: list[float],
    level: float,
    replications: int,
    grid_n: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Rejection probability of the limit test at each c, against the c = 0
    empirical quantile from the same replication streams.

    At c = 0 the rejection rule (draw <= own quantile) returns the nominal
    level exactly whenever level * replications is an integer.
    """
    if any(c > 0 for c in c_grid):
        raise InvalidConfigError("c_grid must be nonpositive")
    base = LimitSpec(
        test=test, case=case, detrend=detrend, m=m, c=0.0, r_squared=r_squared,
        grid_n=grid_n, replications=replications, seed=seed,
    )
    all_c = list(c_grid) if 0.0 in c_grid else [0.0] + list(c_grid)
    draws = _power_draws(base, all_c, workers)
    q = empirical_quantile(draws[all_c.index(0.0)], level)
    power = [float(np.mean(draws[all_c.index(c)] <= q)) for c in c_grid]
    return np.array(power)


def _power_chunk(args: tuple) -> np.ndarray:
    base, all_c, start, stop = args
    out = np.empty((len(all_c), stop - start))
    n, m = base.grid_n, base.m
    for i, rep in enumerate(range(start, stop)):
        eps = RngStream(base.seed, rep).generator().standard_normal((n, 1 + m))
        for k, c in enumerate(all_c):
            spec = replace(base, c=c)
            bundle = paths_from_normals(eps, c, base.r_squared)
            out[k, i] = draws_from_bundle(bundle, spec, [base.test])[base.test]
    return out


def _power_draws(base: LimitSpec, all_c: list[float], workers: int) -> np.ndarray:
    """Draw matrix (len(all_c) x replications) with common random numbers
    across c values."""
    reps = base.replications
    if workers <= 1 or reps < 2 * workers:
        return _power_chunk((base, all_c, 0, reps))
    bounds = np.linspace(0, reps, workers + 1, dtype=int)
    chunks = [(base, all_c, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_power_chunk, chunks))
    return np.hstack(results)


def _gls_power_chunk(args: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Worker for the c_bar calibration: null draw (c = 0, r2 = 0) and
    alternative draw (c = c_bar, r2 = r2_alt) per replication, common normals."""
    case, m, c_bar, r2_alt, grid_n, seed, start, stop = args
    detrend = DetrendMode.gls(c_bar)
    null_spec = LimitSpec(
        test=TestKind.VR, case=case, detrend=detrend, m=m, c=0.0,
        r_squared=0.0, grid_n=grid_n, replications=stop - start, seed=seed,
    )
    alt_spec = replace(null_spec, c=c_bar, r_squared=r2_alt)
    null_draws = np.empty(stop - start)
    alt_draws = np.empty(stop - start)
    for i, rep in enumerate(range(start, stop)):
        eps = RngStream(seed, rep).generator().standard_normal((grid_n, 1 + m))
        null_bundle = paths_from_normals(eps, 0.0, 0.0)
        alt_bundle = paths_from_normals(eps, c_bar, r2_alt)
        null_draws[i] = draws_from_bundle(null_bundle, null_spec, [TestKind.VR])[TestKind.VR]
        alt_draws[i] = draws_from_bundle(alt_bundle, alt_spec, [TestKind.VR])[TestKind.VR]
    return null_draws, alt_draws


def _gls_power_at(
    case: Case, m: int, c_bar: float, r2_alt: float,
    replications: int, grid_n: int, seed: int, level: float, workers: int,
) -> float:
    """P(alternative draw below the null quantile) for candidate c_bar."""
    bounds = np.linspace(0, replications, max(1, workers) + 1, dtype=int)
    chunks = [
        (case, m, c_bar, r2_alt, grid_n, seed, int(a), int(b))
        for a, b in zip(bounds[:-1], bounds[1:])
        if b > a
    ]
    if workers <= 1 or len(chunks) < 2:
        results = [_gls_power_chunk((case, m, c_bar, r2_alt, grid_n, seed, 0, replications))]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_gls_power_chunk, chunks))
    null_draws = np.concatenate([r[0] for r in results])
    alt_draws = np.concatenate([r[1] for r in results])
    q = empirical_quantile(null_draws, level)
    return float(np.mean(alt_draws <= q))


def calibrate_cbar(
    case: Case,
    m: int,
    replications: int = 10_000,
    grid_n: int = 10_000,
    seed: int = 0,
    r_squared: float = 0.4,
    level: float = 0.05,
    workers: int = 1,
) -> float:
    """Quasi-differencing constant at which local power of the GLS variance
    ratio test equals one half.

    Searches the 0.25-step grid on [-100, 0] for the c_bar whose local power
    at the alternative c = c_bar (r_squared = 0.4) is nearest to one half,
    using common random numbers across candidates. Power is evaluated against
    the candidate's own null quantile.
    """
    if case is Case.D0:
        raise InvalidCaseError("GLS detrending is undefined in case D0")

    cache: dict[float, float] = {}

    def power(c_bar: float) -> float:
        if c_bar not in cache:
            cache[c_bar] = _gls_power_at(
                case, m, c_bar, r_squared, replications, grid_n, seed, level, workers
            )
        return cache[c_bar]

    lo, hi = CBAR_SEARCH_RANGE
    hi = hi - CBAR_STEP  # skip c_bar = 0, where GLS collapses to differencing
    n_steps = int(round((hi - lo) / CBAR_STEP))
    grid = [lo + k * CBAR_STEP for k in range(n_steps + 1)]
    if (power(grid[0]) - 0.5) * (power(grid[-1]) - 0.5) > 0:
        raise NoSolutionInRangeError(
            f"power does not bracket 0.5 on [{lo}, {hi}] for {case.value}, m={m}"
        )
    # Power decreases toward 0.5-and-below as c_bar rises to 0; bisect on the grid.
    i_lo, i_hi = 0, len(grid) - 1
    while i_hi - i_lo > 1:
        mid = (i_lo + i_hi) // 2
        if power(grid[mid]) >= 0.5:
            i_lo = mid
        else:
            i_hi = mid
    candidates = [grid[i_lo], grid[i_hi]]
    return min(candidates, key=lambda cb: abs(power(cb) - 0.5))
