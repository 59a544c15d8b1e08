"""Finite-sample size and power experiments over the simulation designs.

Results come back as long-format tables (one row per design cell and test)
with the fixed column order: experiment, test, case, detrend, criterion,
dynamics, r2, T, c, lambda_u, value, replications, seed. Replication streams
are keyed by (seed, block * replications + rep) with deterministic block
numbering, so identical plans give identical tables for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from vrcoint.core import RngStream, empirical_quantile
from vrcoint.detrend import Case, DetrendMode
from vrcoint.dgp import DgpConfig, ShortRunDynamics, generate_sample
from vrcoint.exceptions import InvalidConfigError, VrcointError
from vrcoint.residuals import cointegrating_residuals
from vrcoint.statistics import (
    Criterion,
    KernelSpec,
    TestKind,
    adf_statistic,
    default_pmax,
    msb_statistic,
    select_lag,
    vr_statistic,
    zalpha_statistic,
)
from vrcoint.tables import QuantileTable, default_c_bar

RESULT_COLUMNS = [
    "experiment", "test", "case", "detrend", "criterion", "dynamics",
    "r2", "T", "c", "lambda_u", "value", "replications", "seed",
]

# 21 equidistant alternatives on [0, 60], negated (c = 0 is the null).
DEFAULT_C_GRID = tuple(-3.0 * k for k in range(21))
DEFAULT_LAMBDA_GRID = tuple(0.5 * k for k in range(11))


@dataclass(frozen=True)
class TestSpec:
    """One finite-sample test variant: kind, detrending, tuning choices."""

    __test__ = False  # not a pytest suite despite the name

    kind: TestKind
    detrend: str = "ols"  # "ols" | "gls"
    criterion: Criterion = Criterion.AIC
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self) -> None:
        if self.detrend not in ("ols", "gls"):
            raise InvalidConfigError(f"unknown detrending {self.detrend!r}")
        if self.kind is TestKind.ZALPHA and self.detrend == "gls":
            raise InvalidConfigError("Z-alpha is only defined for OLS detrending")

    def label(self) -> str:
        parts = [self.kind.value]
        if self.detrend == "gls":
            parts.append("gls")
        if self.kind in (TestKind.ADF, TestKind.MSB) and self.criterion is not Criterion.AIC:
            parts.append(self.criterion.value)
        if self.kind is TestKind.ZALPHA and self.kernel.kernel != "qs":
            parts.append(self.kernel.kernel)
        return "-".join(parts)

    @classmethod
    def parse(cls, text: str) -> "TestSpec":
        tokens = text.strip().lower().split("-")
        kind = TestKind.parse(tokens[0])
        detrend = "gls" if "gls" in tokens[1:] else "ols"
        rest = [t for t in tokens[1:] if t != "gls"]
        criterion = Criterion.AIC
        kernel = KernelSpec()
        for token in rest:
            if token in ("aic", "bic", "maic", "mbic"):
                criterion = Criterion(token)
            elif token in ("qs", "bartlett"):
                kernel = KernelSpec(token)
            else:
                raise InvalidConfigError(f"cannot parse test spec {text!r}")
        return cls(kind=kind, detrend=detrend, criterion=criterion, kernel=kernel)

    def detrend_mode(self, case: Case, m: int = 1) -> DetrendMode:
        if self.detrend == "gls":
            return DetrendMode.gls(default_c_bar(case, m))
        return DetrendMode.ols()


@dataclass(frozen=True)
class ExperimentPlan:
    """Design grid, tests, and Monte Carlo scale for one experiment family."""

    case: Case
    dynamics: tuple[ShortRunDynamics, ...]
    r_squared: tuple[float, ...]
    sample_sizes: tuple[int, ...]
    tests: tuple[TestSpec, ...]
    replications: int = 2000
    level: float = 0.05
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    c_fixed: float = -20.0
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    seed: int = 0

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise InvalidConfigError("plans need at least 100 replications")
        if not self.tests:
            raise InvalidConfigError("plans need at least one test")
        if any(c > 0 for c in self.c_grid):
            raise InvalidConfigError("c_grid must be nonpositive")

    def cells(self) -> list[tuple[ShortRunDynamics, float, int]]:
        return [
            (dyn, r2, T)
            for dyn in self.dynamics
            for r2 in self.r_squared
            for T in self.sample_sizes
        ]

    def plan_hash(self) -> str:
        payload = {
            "case": self.case.value,
            "dynamics": [d.label() for d in self.dynamics],
            "r2": list(self.r_squared),
            "T": list(self.sample_sizes),
            "tests": [t.label() for t in self.tests],
            "replications": self.replications,
            "level": self.level,
            "c_grid": list(self.c_grid),
            "c_fixed": self.c_fixed,
            "lambda_grid": list(self.lambda_grid),
            "seed": self.seed,
        }
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
        return digest.hexdigest()[:12]


@dataclass(frozen=True)
class RejectionTable:
    """Long-format rejection frequencies plus plan provenance."""

    frame: pd.DataFrame
    plan_hash: str

    def write(self, path: str) -> None:
        import os
        import tempfile

        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as handle:
                self.frame.to_csv(handle, index=False, float_format="%g")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _evaluate_tests(y: np.ndarray, x: np.ndarray, case: Case, tests: tuple[TestSpec, ...]) -> np.ndarray:
    """All requested statistics on one sample; failed statistics become NaN.

    Residuals and lag selections are shared across test specs that need the
    same ones.
    """
    T = y.shape[0]
    residuals: dict[str, np.ndarray] = {}
    lags: dict[tuple[str, Criterion], int] = {}
    out = np.empty(len(tests))

    def get_residuals(detrend: str) -> np.ndarray:
        if detrend not in residuals:
            mode = DetrendMode.ols() if detrend == "ols" else DetrendMode.gls(
                default_c_bar(case, 1)
            )
            residuals[detrend] = cointegrating_residuals(y, x, case, mode).u_hat
        return residuals[detrend]

    def get_lag(detrend: str, criterion: Criterion) -> int:
        lag_detrend = "ols" if criterion.is_modified else detrend
        key = (lag_detrend, criterion)
        if key not in lags:
            lags[key] = select_lag(
                get_residuals(lag_detrend), criterion, default_pmax(T)
            ).chosen_p
        return lags[key]

    for i, spec in enumerate(tests):
        try:
            u = get_residuals(spec.detrend)
            if spec.kind is TestKind.VR:
                out[i] = vr_statistic(u)
            elif spec.kind is TestKind.ZALPHA:
                out[i] = zalpha_statistic(u, spec.kernel)[0]
            else:
                p = get_lag(spec.detrend, spec.criterion)
                if spec.kind is TestKind.ADF:
                    out[i] = adf_statistic(u, p)
                else:
                    out[i] = msb_statistic(u, p)
        except VrcointError:
            out[i] = math.nan
    return out


def _stats_chunk(args: tuple) -> np.ndarray:
    config, tests, seed, block, start, stop = args
    reps = stop - start
    out = np.empty((reps, len(tests)))
    for i, rep in enumerate(range(start, stop)):
        rng = RngStream(seed, block * config["replications"] + rep)
        y, x = generate_sample(config["dgp"], rng)
        out[i] = _evaluate_tests(y, x, config["dgp"].case, tests)
    return out


def _simulate_stats(
    dgp: DgpConfig, tests: tuple[TestSpec, ...], replications: int,
    seed: int, block: int, workers: int = 1,
) -> np.ndarray:
    """(replications x len(tests)) statistics for one design cell and block."""
    config = {"dgp": dgp, "replications": replications}
    if workers <= 1 or replications < 2 * workers:
        return _stats_chunk((config, tests, seed, block, 0, replications))
    bounds = np.linspace(0, replications, workers + 1, dtype=int)
    chunks = [
        (config, tests, seed, block, int(a), int(b))
        for a, b in zip(bounds[:-1], bounds[1:])
        if b > a
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_stats_chunk, chunks))
    return np.vstack(results)


def _finite_quantile(draws: np.ndarray, level: float) -> float:
    finite = draws[np.isfinite(draws)]
    return empirical_quantile(finite, level)


def _row(plan: ExperimentPlan, experiment: str, spec: TestSpec, dyn: ShortRunDynamics,
         r2: float, T: int, c: float, lambda_u: float, value: float) -> dict:
    return {
        "experiment": experiment,
        "test": spec.kind.value,
        "case": plan.case.value,
        "detrend": spec.detrend,
        "criterion": spec.criterion.value if spec.kind in (TestKind.ADF, TestKind.MSB) else "",
        "dynamics": dyn.label(),
        "r2": r2,
        "T": T,
        "c": c,
        "lambda_u": lambda_u,
        "value": value,
        "replications": plan.replications,
        "seed": plan.seed,
    }


def empirical_size(plan: ExperimentPlan, critvals: QuantileTable, workers: int = 1) -> RejectionTable:
    """Rejection frequency under the null (rho = 1) at tabulated critical values."""
    rows = []
    for cell_idx, (dyn, r2, T) in enumerate(plan.cells()):
        dgp = DgpConfig(T=T, case=plan.case, dynamics=dyn, r_squared=r2, rho=1.0)
        stats = _simulate_stats(dgp, plan.tests, plan.replications, plan.seed, cell_idx, workers)
        for j, spec in enumerate(plan.tests):
            cv = critvals.critical_value(
                spec.kind, plan.case, spec.detrend, 1, plan.level
            )
            value = float(np.mean(stats[:, j] < cv))
            rows.append(_row(plan, "size", spec, dyn, r2, T, 0.0, 0.0, value))
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return RejectionTable(frame, plan.plan_hash())


def size_corrected_power(plan: ExperimentPlan, workers: int = 1) -> RejectionTable:
    """Rejection frequencies under local alternatives at empirical critical values.

    The c = 0 block of each cell defines the level-alpha empirical critical
    value (lower order statistic); rejections use draw <= value, so the curve
    starts at the nominal level exactly when level * replications is integral.
    """
    if 0.0 not in plan.c_grid:
        raise InvalidConfigError("c_grid must include 0 (the null) for size correction")
    rows = []
    n_blocks = len(plan.c_grid)
    for cell_idx, (dyn, r2, T) in enumerate(plan.cells()):
        stats_by_c = {}
        for c_idx, c in enumerate(plan.c_grid):
            dgp = DgpConfig(
                T=T, case=plan.case, dynamics=dyn, r_squared=r2, rho=1.0 + c / T
            )
            block = cell_idx * n_blocks + c_idx
            stats_by_c[c] = _simulate_stats(
                dgp, plan.tests, plan.replications, plan.seed, block, workers
            )
        for j, spec in enumerate(plan.tests):
            cv = _finite_quantile(stats_by_c[0.0][:, j], plan.level)
            for c in plan.c_grid:
                value = float(np.mean(stats_by_c[c][:, j] <= cv))
                rows.append(_row(plan, "power", spec, dyn, r2, T, c, 0.0, value))
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return RejectionTable(frame, plan.plan_hash())


def large_u0_power(plan: ExperimentPlan, workers: int = 1) -> RejectionTable:
    """Size-corrected power at the fixed alternative ``plan.c_fixed`` as the
    initial error value grows.

    Critical values are the same empirical null (c = 0) values used by the
    size-corrected power curves. The lambda = 0 point reuses the baseline
    burn-in recursion (identical streams to the power experiment's cell), so
    it reproduces the corresponding size-corrected power value exactly.
    """
    if plan.c_fixed >= 0:
        raise InvalidConfigError("the large-u0 experiment needs a fixed c < 0")
    rows = []
    n_blocks = len(plan.lambda_grid) + 1
    for cell_idx, (dyn, r2, T) in enumerate(plan.cells()):
        null_dgp = DgpConfig(T=T, case=plan.case, dynamics=dyn, r_squared=r2, rho=1.0)
        null_stats = _simulate_stats(
            null_dgp, plan.tests, plan.replications, plan.seed, cell_idx * n_blocks, workers
        )
        stats_by_lambda = {}
        for l_idx, lam in enumerate(plan.lambda_grid):
            rho = 1.0 + plan.c_fixed / T
            if lam == 0.0:
                dgp = DgpConfig(T=T, case=plan.case, dynamics=dyn, r_squared=r2, rho=rho)
            else:
                dgp = DgpConfig(
                    T=T, case=plan.case, dynamics=dyn, r_squared=r2, rho=rho,
                    u0_rule="large_fixed", lambda_u=lam,
                )
            block = cell_idx * n_blocks + l_idx + 1
            stats_by_lambda[lam] = _simulate_stats(
                dgp, plan.tests, plan.replications, plan.seed, block, workers
            )
        for j, spec in enumerate(plan.tests):
            cv = _finite_quantile(null_stats[:, j], plan.level)
            for lam in plan.lambda_grid:
                value = float(np.mean(stats_by_lambda[lam][:, j] <= cv))
                rows.append(_row(plan, "u0", spec, dyn, r2, T, plan.c_fixed, lam, value))
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return RejectionTable(frame, plan.plan_hash())


def test_label(row: pd.Series) -> str:
    """Display label for one result row, e.g. ``adf-gls-maic``."""
    parts = [row["test"]]
    if row["detrend"] == "gls":
        parts.append("gls")
    if row["criterion"] and row["criterion"] not in ("", "aic"):
        parts.append(str(row["criterion"]))
    return "-".join(parts)


def panel_pivots(frame: pd.DataFrame, x: str) -> dict[tuple, pd.DataFrame]:
    """One wide (x by test) table per (dynamics, r2, T) panel, plot-ready."""
    frame = frame.copy()
    frame["label"] = frame.apply(test_label, axis=1)
    panels = {}
    for key, group in frame.groupby(["dynamics", "r2", "T"]):
        panels[key] = group.pivot_table(index=x, columns="label", values="value").sort_index()
    return panels
