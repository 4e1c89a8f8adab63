"""
Exception hierarchy for the pipeline.

Most errors subclass ValueError so that callers written against plain
ValueError (boundary guards, config validation) keep working. The CLI maps
each family onto an exit code via exit_code_for().
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class DomainError(ValueError):
    """An argument lies outside the function's domain."""


class ContractError(ValueError):
    """A caller-side precondition was violated."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class GraphError(ValueError):
    """A graph cannot be constructed from the given input."""


class UndefinedMetricError(ValueError):
    """A metric is mathematically undefined for the given inputs."""


class CapabilityError(TypeError):
    """The operation is not supported by this kind of model."""


class NumericError(ArithmeticError):
    """Training produced a non-finite value."""


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, ConfigError):
        return EXIT_USAGE
    if isinstance(exc, (DataError, GraphError, FileNotFoundError, UndefinedMetricError)):
        return EXIT_DATA
    if isinstance(exc, (ValueError, TypeError, OSError)):
        return EXIT_DATA
    return 1
