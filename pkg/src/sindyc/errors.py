"""Exception and warning types raised across the toolkit."""


class SindycError(Exception):
    """Base class for all errors raised by sindyc."""


class ParamError(SindycError, ValueError):
    """Invalid parameter value or combination."""


class DataError(SindycError, ValueError):
    """Non-finite or otherwise unusable numeric data."""


class GridError(DataError):
    """Sample times are not a strictly increasing uniform grid."""


class SchemaError(SindycError, ValueError):
    """File contents do not match the expected layout."""


class SizeError(SindycError, ValueError):
    """Too few samples for the requested operation."""


class ShapeError(SindycError, ValueError):
    """Array shapes are inconsistent with each other or with a library."""


class RankError(SindycError, ValueError):
    """Data matrix has no usable rank."""


class IoError(SindycError, OSError):
    """Reading or writing a file failed."""


class DivergenceError(SindycError, ArithmeticError):
    """A simulated trajectory left the admissible region.

    Attributes:
        time: simulation time at which the blow-up was detected.
    """

    def __init__(self, time, norm=None):
        self.time = float(time)
        self.norm = norm
        msg = f"trajectory diverged at t={self.time:g}"
        if norm is not None:
            msg += f" (|x|={norm:.3g})"
        super().__init__(msg)


class IllConditionedWarning(UserWarning):
    """Regression matrix is (numerically) rank deficient."""
