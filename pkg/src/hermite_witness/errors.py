"""Exception hierarchy. Each class maps to one CLI exit code."""


class WitnessError(Exception):
    exit_code = 1


class ArgumentError(WitnessError, ValueError):
    """Invalid argument value or combination."""

    exit_code = 2


class DomainError(ArgumentError):
    """Argument outside the mathematical domain of a function (e.g. non-finite)."""


class DataError(WitnessError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class ResourceError(WitnessError, RuntimeError):
    """Request would exceed a size or enumeration budget."""

    exit_code = 4
