from typing import Optional

import gin

__all__ = [
    'LinrelError',
    'DimensionMismatchError',
    'NotAnOperatorError',
    'PreconditionError',
    'NotInResolventSetError',
    'GenerationError',
    'ProblemError',
    'guard_band',
    'add_gin_extension',
]


class LinrelError(Exception):
    """Base class of every error raised by linrel."""


class DimensionMismatchError(LinrelError, ValueError):
    pass


class NotAnOperatorError(LinrelError, ValueError):
    pass


class PreconditionError(LinrelError, ValueError):
    pass


class NotInResolventSetError(PreconditionError):
    pass


class GenerationError(LinrelError, RuntimeError):
    pass


class ProblemError(LinrelError, ValueError):
    """Malformed problem file. `location` is a JSON position or field path."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location is not None:
            message = f'{location}: {message}'
        super().__init__(message)


@gin.configurable
def guard_band(factor: float = 10.) -> float:
    """Width (as a multiplicative factor) of the band around a tolerance
    inside which a decision is considered boundary-ambiguous."""
    if factor <= 1:
        raise PreconditionError(f'guard band factor must exceed 1, got {factor}')
    return factor


def add_gin_extension(config_name: str) -> str:
    if config_name[-4:] != '.gin':
        config_name += '.gin'
    return config_name
