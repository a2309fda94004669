"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter violates a documented precondition (CLI exit code 2)."""


class InputSizeError(ParameterError):
    """An input has the wrong size or shape (seed length, dimension mismatch)."""


class PositionError(ParameterError):
    """An index lies outside the valid position or coordinate range."""


class PrecisionError(ParameterError):
    """A precision setting is unusable (M > w, or a grid too coarse)."""


class InfeasiblePrecisionError(PrecisionError):
    """The derived precision requirement exceeds the field-width cap."""


class DomainError(ParameterError):
    """A numeric argument is outside the mathematical domain of an operation."""


class CapabilityError(ParameterError):
    """The request exceeds a documented capability cap of this implementation."""


class ConfigError(ParameterError):
    """Invalid run configuration (unknown keys, corpus/parameter mismatch)."""
