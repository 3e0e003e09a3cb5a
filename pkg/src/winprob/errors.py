"""Exception types shared across the package."""


class WinprobError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(WinprobError, ValueError):
    """A domain value violates its invariants."""


class SchemaError(WinprobError, ValueError):
    """A JSON payload has the wrong schema version, type tag or shape."""


class CsvFormatError(WinprobError, ValueError):
    """A CSV input has a missing or unknown header, or exceeds the row-error budget."""


class RatingLookupError(WinprobError, LookupError):
    """A team or game rating needed to build a state is missing."""


class ConstantColumnError(WinprobError, ValueError):
    """A design column has zero variance and cannot be standardized."""


class ConvergenceError(WinprobError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class SingularScheduleError(WinprobError, RuntimeError):
    """The schedule is rank-deficient and no ridge fallback was allowed."""


class ModelFormatError(WinprobError, ValueError):
    """A model file is damaged, has the wrong version, or the wrong type tag."""
