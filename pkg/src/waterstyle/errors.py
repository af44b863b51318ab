"""Exception types shared across the package.

The CLI maps these onto stable exit codes: format/file problems are exit 2,
constraint violations exit 3, numerical failures exit 1.
"""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateStatsError(InvalidArgumentError):
    """Too few samples to form meaningful statistics (fewer than 2 pixels)."""


class MissingComponentError(InvalidArgumentError):
    """A loss aggregate was requested but a required component is absent."""


class NumericalFailureError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class FormatError(ValueError):
    """A file is malformed: bad magic, truncated payload, unsupported layout."""
