"""Critical-value tables: lookup, flat-text serialization, shipped assets.

The file format is one header row followed by one row per
(test, case, detrend, m, level) with the simulated quantile and the
provenance columns replications/grid_n/seed. Values carry five significant
digits. Rows are written in a fixed sort order so regeneration with the same
inputs is byte-identical.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from importlib import resources

from vrcoint.detrend import Case, DetrendMode
from vrcoint.exceptions import MissingCriticalValueError
from vrcoint.statistics import TestKind

COLUMNS = ["test", "case", "detrend", "m", "level", "value",
           "replications", "grid_n", "seed"]

ASSET_NAME = "critical_values.csv"

# Default quasi-differencing constants for GLS detrending, by (case, m):
# calibrated so that local power of the GLS variance ratio test is one half
# at the 5% level when the squared long-run correlation is 0.4. Regenerate
# with ``vrcoint calibrate-cbar``.
DEFAULT_C_BAR: dict[tuple[Case, int], float] = {
    (Case.D1, 1): -40.25, (Case.D1, 2): -46.25, (Case.D1, 3): -53.75,
    (Case.D1, 4): -55.75, (Case.D1, 5): -60.00,
    (Case.D2, 1): -48.25, (Case.D2, 2): -55.25, (Case.D2, 3): -56.50,
    (Case.D2, 4): -65.00, (Case.D2, 5): -68.75,
}


def default_c_bar(case: Case, m: int) -> float:
    try:
        return DEFAULT_C_BAR[(case, m)]
    except KeyError:
        raise MissingCriticalValueError(
            f"no default c_bar for case {case.value}, m={m}; calibrate one explicitly"
        ) from None


@dataclass(frozen=True)
class TableRow:
    test: str
    case: str
    detrend: str
    m: int
    level: float
    value: float
    replications: int
    grid_n: int
    seed: int


class QuantileTable:
    """Collection of tabulated critical values with keyed lookup."""

    def __init__(self, rows: list[TableRow]):
        self.rows = list(rows)
        self._index = {
            (r.test, r.case, r.detrend, r.m, round(r.level, 6)): r.value for r in self.rows
        }

    def __len__(self) -> int:
        return len(self.rows)

    def critical_value(
        self, test: TestKind, case: Case, detrend: DetrendMode | str, m: int, level: float
    ) -> float:
        detrend_label = detrend if isinstance(detrend, str) else detrend.label()
        key = (test.value, case.value, detrend_label, m, round(level, 6))
        try:
            return self._index[key]
        except KeyError:
            raise MissingCriticalValueError(
                f"no critical value for test={test.value} case={case.value} "
                f"detrend={detrend_label} m={m} level={level}"
            ) from None

    def levels(self, test: TestKind, case: Case, detrend: DetrendMode | str, m: int) -> dict:
        detrend_label = detrend if isinstance(detrend, str) else detrend.label()
        return {
            r.level: r.value
            for r in self.rows
            if (r.test, r.case, r.detrend, r.m) == (test.value, case.value, detrend_label, m)
        }

    def merged_with(self, other: "QuantileTable") -> "QuantileTable":
        return QuantileTable(self.rows + other.rows)

    def to_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        ordered = sorted(
            self.rows, key=lambda r: (r.test, r.case, r.detrend, r.m, r.level)
        )
        for r in ordered:
            writer.writerow(
                [r.test, r.case, r.detrend, r.m, format(r.level, "g"),
                 format(r.value, ".5g"), r.replications, r.grid_n, r.seed]
            )
        return buf.getvalue()

    def write(self, path: str) -> None:
        """Atomic write: temp file in the target directory, then rename."""
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as handle:
                handle.write(self.to_text())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def from_text(cls, text: str) -> "QuantileTable":
        reader = csv.DictReader(io.StringIO(text))
        rows = [
            TableRow(
                test=rec["test"], case=rec["case"], detrend=rec["detrend"],
                m=int(rec["m"]), level=float(rec["level"]), value=float(rec["value"]),
                replications=int(rec["replications"]), grid_n=int(rec["grid_n"]),
                seed=int(rec["seed"]),
            )
            for rec in reader
        ]
        return cls(rows)

    @classmethod
    def read(cls, path: str) -> "QuantileTable":
        with open(path, newline="") as handle:
            return cls.from_text(handle.read())


def load_packaged_table() -> QuantileTable:
    """Critical values shipped with the package (see README for provenance)."""
    text = resources.files("vrcoint.assets").joinpath(ASSET_NAME).read_text()
    return QuantileTable.from_text(text)
