"""Command line interface.

Subcommands: ``test`` (run tests on CSV data), ``tabulate`` (simulate critical
values), ``calibrate-cbar`` (GLS quasi-differencing constant), ``simulate``
(size/power/large-u0/limit-power experiments with delimited output, plot-ready
pivots, and rendered figures).

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np
import pandas as pd

from vrcoint.asymptotics import calibrate_cbar, local_power_curve, tabulate_critical_values
from vrcoint.detrend import Case, DetrendMode
from vrcoint.dgp import ShortRunDynamics
from vrcoint.exceptions import (
    DataError,
    ColumnNotFoundError,
    InvalidCaseError,
    InvalidConfigError,
    MissingCriticalValueError,
    NonNumericDataError,
    RankDeficientError,
    SampleTooSmallError,
    VrcointError,
)
from vrcoint.experiments import (
    RESULT_COLUMNS,
    ExperimentPlan,
    TestSpec,
    empirical_size,
    large_u0_power,
    size_corrected_power,
)
from vrcoint.statistics import Criterion, KernelSpec, TestKind, run_test
from vrcoint.tables import QuantileTable, default_c_bar, load_packaged_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

ALL_DYNAMICS = (
    "iid", "ar(0.3)", "ar(0.6)", "ar(0.9)", "ma(0.3)", "ma(0.6)", "ma(0.9)",
    "arma(0.3,0.6)", "arma(0.3,0.3)", "arma(0.6,0.3)",
    "garch(0.05,0.94)", "garch(0.01,0.98)",
)
ALL_TESTS = (
    "vr", "vr-gls", "adf", "adf-gls", "adf-maic", "adf-gls-maic",
    "msb", "msb-gls-maic", "zalpha",
)
DEFAULT_LEVELS = "0.01,0.025,0.05,0.075,0.1,0.15"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with code 1
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


@dataclass
class TestReport:
    """One test outcome with critical values, decision, and provenance."""

    __test__ = False  # not a pytest suite despite the name

    statistic: object
    critical_values: dict
    decision: str
    level: float
    provenance: dict
    table_seed: int

    def to_dict(self) -> dict:
        s = self.statistic
        return {
            "test": s.kind.value,
            "case": s.settings["case"],
            "detrend": s.settings["detrend"],
            "m": s.settings["m"],
            "T": s.settings["T"],
            "statistic": s.value,
            "critical_values": {format(k, "g"): v for k, v in sorted(self.critical_values.items())},
            "decision": self.decision,
            "settings": _jsonable(s.settings),
            "seed": self.table_seed,
            "provenance": self.provenance,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)


def _write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _parse_grid(text: str) -> list[float]:
    """Either 'start:stop:count' (inclusive linspace) or a comma list."""
    if ":" in text:
        start, stop, count = text.split(":")
        return list(np.linspace(float(start), float(stop), int(count)))
    return _parse_floats(text)


def _parse_m_range(text: str) -> list[int]:
    text = text.strip()
    if "-" in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",")]


def _load_critvals(path: str | None) -> QuantileTable:
    if path is None:
        return load_packaged_table()
    if not os.path.exists(path):
        raise CliError(f"critical-value table not found: {path}", EXIT_DATA)
    return QuantileTable.read(path)


def _resolve_cbar(text: str, case: Case, m: int) -> float:
    if text == "auto":
        return default_c_bar(case, m)
    try:
        value = float(text)
    except ValueError:
        raise CliError(f"--cbar must be 'auto' or a number, got {text!r}", EXIT_USAGE) from None
    return value


# ---------------------------------------------------------------- test command


def _read_data(args) -> tuple[np.ndarray, np.ndarray, dict]:
    if not os.path.exists(args.data):
        raise CliError(f"input file not found: {args.data}", EXIT_DATA)
    frame = pd.read_csv(args.data)
    if frame.empty:
        raise CliError(f"no rows in {args.data}", EXIT_DATA)
    label_column = None
    first = frame.columns[0]
    if not pd.api.types.is_numeric_dtype(frame[first]):
        label_column = first
    rhs = [c.strip() for c in args.rhs.split(",") if c.strip()]
    for name in [args.lhs] + rhs:
        if name not in frame.columns:
            raise ColumnNotFoundError(f"column {name!r} not in {args.data}")
    if args.lhs in rhs:
        raise RankDeficientError(
            f"column {args.lhs!r} appears on both sides of the regression"
        )
    duplicates = {name for name in rhs if rhs.count(name) > 1}
    if duplicates:
        raise RankDeficientError(
            f"right-hand side column(s) {sorted(duplicates)} listed more than once"
        )
    data = frame[[args.lhs] + rhs]
    if not all(pd.api.types.is_numeric_dtype(data[c]) for c in data.columns):
        bad = [c for c in data.columns if not pd.api.types.is_numeric_dtype(data[c])]
        raise NonNumericDataError(f"non-numeric data in column(s) {bad}")
    if data.isna().any().any():
        raise NonNumericDataError("missing values in the selected columns")
    if args.last is not None:
        if args.last > len(data):
            raise SampleTooSmallError(
                f"--last {args.last} exceeds the {len(data)} available rows"
            )
        frame_tail = data.tail(args.last)
    else:
        frame_tail = data
    values = frame_tail.to_numpy(dtype=float)
    if args.log:
        if np.any(values <= 0):
            raise NonNumericDataError("--log requires strictly positive data")
        values = np.log(values)
    provenance = {
        "file": args.data,
        "lhs": args.lhs,
        "rhs": rhs,
        "label_column": label_column,
        "rows_used": int(values.shape[0]),
        "log": bool(args.log),
    }
    return values[:, 0], values[:, 1:], provenance


def cmd_test(args) -> int:
    case = Case.parse(args.case)
    y, X, provenance = _read_data(args)
    m = X.shape[1]
    if args.detrend == "gls":
        if case is Case.D0:
            raise InvalidCaseError("GLS detrending is undefined in case D0")
        mode = DetrendMode.gls(_resolve_cbar(args.cbar, case, m))
    else:
        mode = DetrendMode.ols()
    critvals = _load_critvals(args.critvals)
    kinds = (
        [TestKind.parse(args.test)]
        if args.test != "all"
        else [k for k in TestKind if not (mode.is_gls and k is TestKind.ZALPHA)]
    )
    kernel = KernelSpec(args.kernel, args.bandwidth if args.bandwidth else "andrews")
    reports = []
    for kind in kinds:
        stat = run_test(
            y, X, case, mode, kind,
            criterion=Criterion.parse(args.criterion),
            p=args.lag,
            kernel=kernel,
        )
        levels = critvals.levels(kind, case, mode, m)
        if not levels:
            raise MissingCriticalValueError(
                f"no critical values for {kind.value} under case {case.value}, "
                f"detrend {mode.label()}, m={m}"
            )
        cv = levels.get(args.level)
        if cv is None:
            raise MissingCriticalValueError(
                f"level {args.level} not tabulated for {kind.value} "
                f"(available: {sorted(levels)})"
            )
        decision = "reject" if stat.value < cv else "fail_to_reject"
        table_seed = next(
            r.seed for r in critvals.rows
            if (r.test, r.case, r.detrend, r.m) == (kind.value, case.value, mode.label(), m)
        )
        reports.append(
            TestReport(
                statistic=stat, critical_values=levels, decision=decision,
                level=args.level, provenance=provenance, table_seed=table_seed,
            )
        )
    if args.format == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        _print_text_reports(reports, args.level)
    return EXIT_OK


def _print_text_reports(reports: list[TestReport], level: float) -> None:
    prov = reports[0].provenance
    stat0 = reports[0].statistic
    print(f"data: {prov['file']}  lhs={prov['lhs']}  rhs={','.join(prov['rhs'])}"
          f"  T={stat0.settings['T']}  m={stat0.settings['m']}")
    print(f"case: {stat0.settings['case']}  detrend: {stat0.settings['detrend']}"
          + (f"  c_bar: {stat0.settings['c_bar']:g}" if stat0.settings.get("c_bar") else ""))
    header = f"{'test':8} {'statistic':>12} {'cv(' + format(level, 'g') + ')':>12} {'decision':>15}"
    print(header)
    print("-" * len(header))
    for rep in reports:
        s = rep.statistic
        cv = rep.critical_values[rep.level]
        extra = []
        if "p" in s.settings:
            extra.append(f"p={s.settings['p']} ({s.settings['criterion']})")
        if "bandwidth" in s.settings:
            extra.append(f"bw={s.settings['bandwidth']:.3f} ({s.settings['kernel']})")
        note = "  " + ", ".join(extra) if extra else ""
        print(f"{s.kind.value:8} {s.value:12.4f} {cv:12.4f} {rep.decision:>15}{note}")


# ------------------------------------------------------------ tabulate command


def _tabulate_combos(args) -> list[tuple[TestKind, Case, str]]:
    tests = list(TestKind) if args.test == "all" else [TestKind.parse(args.test)]
    cases = list(Case) if args.case == "all" else [Case.parse(args.case)]
    detrends = ["ols", "gls"] if args.detrend == "both" else [args.detrend]
    explicit = args.test != "all" and args.case != "all" and args.detrend != "both"
    combos = []
    for test in tests:
        for case in cases:
            for det in detrends:
                if det == "gls" and (case is Case.D0 or test is TestKind.ZALPHA):
                    if explicit:
                        raise InvalidCaseError(
                            f"GLS is undefined for test={test.value}, case={case.value}"
                        )
                    continue  # wildcard expansion skips invalid combos
                combos.append((test, case, det))
    if not combos:
        raise CliError("no valid (test, case, detrend) combination requested", EXIT_USAGE)
    return combos


def cmd_tabulate(args) -> int:
    levels = _parse_floats(args.levels)
    m_list = _parse_m_range(args.m_range)
    combined: QuantileTable | None = None
    for test, case, det in _tabulate_combos(args):
        for m in m_list:
            if det == "gls":
                mode = DetrendMode.gls(_resolve_cbar(args.cbar, case, m))
            else:
                mode = DetrendMode.ols()
            table = tabulate_critical_values(
                test, case, mode, [m], levels,
                replications=args.reps, grid_n=args.grid, seed=args.seed,
                workers=args.workers,
            )
            combined = table if combined is None else combined.merged_with(table)
    combined.write(args.out)
    print(f"wrote {len(combined)} rows to {args.out}")
    return EXIT_OK


# ------------------------------------------------------- calibrate-cbar command


def cmd_calibrate_cbar(args) -> int:
    case = Case.parse(args.case)
    if case is Case.D0:
        raise InvalidCaseError("GLS detrending is undefined in case D0")
    value = calibrate_cbar(
        case, args.m, replications=args.reps, grid_n=args.grid, seed=args.seed,
        workers=args.workers,
    )
    if args.format == "json":
        print(json.dumps({"case": case.value, "m": args.m, "c_bar": value,
                          "replications": args.reps, "grid_n": args.grid,
                          "seed": args.seed}))
    else:
        print(f"c_bar({case.value}, m={args.m}) = {value}")
    return EXIT_OK


# ------------------------------------------------------------ simulate command


def _expand_tests(text: str, case: Case) -> tuple[TestSpec, ...]:
    if text == "all":
        names = [t for t in ALL_TESTS if not (case is Case.D0 and "gls" in t)]
    else:
        names = [tok.strip() for tok in text.split(",") if tok.strip()]
    return tuple(TestSpec.parse(name) for name in names)


def _expand_dynamics(text: str) -> tuple[ShortRunDynamics, ...]:
    names = ALL_DYNAMICS if text == "all" else [t for t in text.split(",") if t.strip()]
    return tuple(ShortRunDynamics.parse(name) for name in names)


def _simulate_lap(args, case: Case) -> pd.DataFrame:
    c_grid = [-abs(c) or 0.0 for c in _parse_grid(args.c_grid)]
    r2_values = _parse_floats(args.r2)
    rows = []
    for spec in _expand_tests(args.tests, case):
        detrend = spec.detrend_mode(case, args.m)
        for r2 in r2_values:
            power = local_power_curve(
                spec.kind, case, detrend, m=args.m, r_squared=r2,
                c_grid=c_grid, level=args.level, replications=args.reps,
                grid_n=args.grid, seed=args.seed, workers=args.workers,
            )
            for c, value in zip(c_grid, power):
                rows.append({
                    "experiment": "lap", "test": spec.kind.value, "case": case.value,
                    "detrend": spec.detrend, "criterion": "",
                    "dynamics": "none", "r2": r2, "T": 0, "c": c, "lambda_u": 0.0,
                    "value": float(value), "replications": args.reps, "seed": args.seed,
                })
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def cmd_simulate(args) -> int:
    from vrcoint.plots import render_power_panels

    case = Case.parse(args.case)
    if args.full_design:
        args.dynamics, args.tests, args.r2 = "all", "all", "0,0.4,0.8"
        args.T, args.reps = "100,250", 5000
    if args.experiment == "lap":
        frame = _simulate_lap(args, case)
    else:
        plan = ExperimentPlan(
            case=case,
            dynamics=_expand_dynamics(args.dynamics),
            r_squared=tuple(_parse_floats(args.r2)),
            sample_sizes=tuple(int(t) for t in _parse_floats(args.T)),
            tests=_expand_tests(args.tests, case),
            replications=args.reps,
            level=args.level,
            c_grid=tuple(-abs(c) or 0.0 for c in _parse_grid(args.c_grid)),
            c_fixed=args.c,
            lambda_grid=tuple(_parse_grid(args.lambda_grid)),
            seed=args.seed,
        )
        if args.experiment == "size":
            table = empirical_size(plan, _load_critvals(args.critvals), workers=args.workers)
        elif args.experiment == "power":
            table = size_corrected_power(plan, workers=args.workers)
        else:
            table = large_u0_power(plan, workers=args.workers)
        frame = table.frame
    _write_text_atomic(args.out, frame.to_csv(index=False, float_format="%g"))
    written = [args.out]
    stem = os.path.splitext(args.out)[0]
    x_axis = {"power": "c", "u0": "lambda_u", "lap": "c", "size": None}[args.experiment]
    if x_axis is not None:
        from vrcoint.experiments import panel_pivots

        for (dyn, r2, T), pivot in panel_pivots(frame, x=x_axis).items():
            from vrcoint.plots import panel_slug

            path = f"{stem}_{panel_slug(dyn, r2, T)}_pivot.csv"
            _write_text_atomic(path, pivot.to_csv(float_format="%g"))
            written.append(path)
        if not args.no_plot:
            written += render_power_panels(frame, x_axis, stem, level=args.level)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


# -------------------------------------------------------------------- assembly


def build_parser() -> Parser:
    parser = Parser(prog="vrcoint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run no-cointegration tests on CSV data")
    p.add_argument("data", help="CSV file with a header row")
    p.add_argument("--lhs", required=True, help="left-hand side column")
    p.add_argument("--rhs", required=True, help="comma-separated regressor columns")
    p.add_argument("--case", default="d2", choices=["d0", "d1", "d2"])
    p.add_argument("--detrend", default="ols", choices=["ols", "gls"])
    p.add_argument("--cbar", default="auto", help="GLS constant: 'auto' or a number")
    p.add_argument("--test", default="all", choices=["vr", "adf", "msb", "zalpha", "all"])
    p.add_argument("--criterion", default="aic", choices=["aic", "bic", "maic", "mbic"])
    p.add_argument("--kernel", default="qs", choices=["qs", "bartlett"])
    p.add_argument("--bandwidth", type=float, default=None, help="fixed kernel bandwidth")
    p.add_argument("--lag", type=int, default=None, help="fixed lag order (skip selection)")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--last", type=int, default=None, help="use only the last N rows")
    p.add_argument("--log", action="store_true", help="apply natural log to the data")
    p.add_argument("--critvals", default=None, help="critical-value table (default: packaged)")
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("tabulate", help="simulate asymptotic critical values")
    p.add_argument("--test", default="all", choices=["vr", "adf", "msb", "zalpha", "all"])
    p.add_argument("--case", default="all", choices=["d0", "d1", "d2", "all"])
    p.add_argument("--detrend", default="both", choices=["ols", "gls", "both"])
    p.add_argument("--m-range", default="1-5", help="e.g. '1-5' or '1,3'")
    p.add_argument("--levels", default=DEFAULT_LEVELS)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cbar", default="auto")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("calibrate-cbar", help="calibrate the GLS quasi-differencing constant")
    p.add_argument("--case", required=True, choices=["d0", "d1", "d2"])
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_calibrate_cbar)

    p = sub.add_parser("simulate", help="run size/power/u0/limit-power experiments")
    p.add_argument("--experiment", required=True, choices=["size", "power", "u0", "lap"])
    p.add_argument("--case", default="d1", choices=["d0", "d1", "d2"])
    p.add_argument("--dynamics", default="iid", help="comma list or 'all'")
    p.add_argument("--r2", default="0", help="comma list of squared long-run correlations")
    p.add_argument("--T", default="100", help="comma list of sample sizes")
    p.add_argument("--tests", default="all", help="comma list like 'vr,adf-maic' or 'all'")
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--c-grid", default="0:60:21", help="'start:stop:count' or comma list (negated)")
    p.add_argument("--c", type=float, default=-20.0, help="fixed c for the u0 experiment")
    p.add_argument("--lambda-grid", default="0:5:11")
    p.add_argument("--m", type=int, default=1, help="regressor count (lap only)")
    p.add_argument("--grid", type=int, default=10_000, help="grid steps (lap only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--critvals", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.add_argument("--full-design", action="store_true",
                   help="long-running full replication: all dynamics/tests, 5000 reps")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ColumnNotFoundError, NonNumericDataError, DataError, SampleTooSmallError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidConfigError, InvalidCaseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VrcointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
