"""Exception and warning types raised across the package."""


class VrcointError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(VrcointError):
    """Input arrays have incompatible shapes."""


class RankDeficientError(VrcointError):
    """Regressor matrix is numerically rank deficient."""


class EmptyInputError(VrcointError):
    """An operation received an empty array."""


class SampleTooSmallError(VrcointError):
    """Not enough observations for the requested computation."""


class InvalidCaseError(VrcointError):
    """Deterministic case is not admissible for the operation (e.g. GLS under D0)."""


class DegenerateResidualsError(VrcointError):
    """Residual series has zero sum of squares."""


class NearSingularARSumError(VrcointError):
    """Sum of AR coefficients in the auxiliary regression is too close to one."""


class InvalidConfigError(VrcointError):
    """Simulation configuration violates its invariants."""


class UnitRhoError(VrcointError):
    """|rho| = 1 where a stationary autoregressive parameter is required."""


class MissingCriticalValueError(VrcointError):
    """No critical value available for the requested (test, case, detrend, m, level)."""


class NoSolutionInRangeError(VrcointError):
    """Calibration target is not bracketed on the search interval."""


class NumericalSingularityError(VrcointError):
    """A simulated moment matrix was singular on the grid."""


class DataError(VrcointError):
    """Problem with user-supplied input data (file, columns, values)."""


class ColumnNotFoundError(DataError):
    """Requested column is missing from the input file."""


class NonNumericDataError(DataError):
    """Selected data columns contain non-numeric values."""


class NonpositiveLongRunVarianceWarning(UserWarning):
    """Kernel long-run variance estimate was nonpositive; reported and kept."""


class PureDifferencingWarning(UserWarning):
    """GLS detrending with c_bar = 0 collapses to pure differencing."""
