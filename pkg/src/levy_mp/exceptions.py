"""Custom exceptions for the levy_mp package.

This module defines the exception hierarchy used throughout levy_mp.  Every
numerical failure is raised as one of these types rather than surfacing as a
NaN, so callers can separate a rejected parameter from a quadrature that did
not converge or a simulated path that left every compact set.

Classes:
    LevyMPException: Base exception for all levy_mp errors.
    ParameterError: A parameter lies outside its admissible range.
    QuadratureError: A quadrature did not reach the requested accuracy.
    SimulationBlowUp: A simulated path exceeded the blow-up threshold.
    PreconditionError: An operation was called outside its preconditions.
    ConfigError: An experiment file or configuration key is invalid.

Example::

    >>> from levy_mp.exceptions import ParameterError
    >>> try:
    ...     raise ParameterError("alpha(x) must lie in (0, 2)", point=0.5)
    ... except ParameterError as e:
    ...     print(f"{e.message} at x={e.point}")
    alpha(x) must lie in (0, 2) at x=0.5

See Also:
    levy_mp.levy_core: Symbol construction and quadrature
    levy_mp.simulate: Path simulation
"""
from typing import Any, Dict, Optional


class LevyMPException(Exception):
    """Exception representing an error raised by levy_mp."""

    def __init__(self, message: str) -> None:
        """Construct an instance of LevyMPException.

        Args:
            message: Description of exception cause
        """
        self.message = message
        super().__init__(message)

    def __str__(self) -> str:
        return self.message


class ParameterError(LevyMPException):
    """A parameter (catalog, mollifier, scheme) lies outside its admissible range."""

    def __init__(self, message: str, point: Optional[Any] = None) -> None:
        """Construct an instance of ParameterError.

        Args:
            message: Description of exception cause
            point: The offending spatial point, when the failure is point-wise
        """
        super().__init__(message)
        self.point = point


class QuadratureError(LevyMPException):
    """A quadrature did not converge; carries the partial sums computed so far."""

    def __init__(self, message: str, partial_sums: Optional[Dict[str, Any]] = None) -> None:
        """Construct an instance of QuadratureError.

        Args:
            message: Description of exception cause
            partial_sums: Named partial results and error estimates gathered before the failure
        """
        super().__init__(message)
        self.partial_sums = dict(partial_sums or {})


class SimulationBlowUp(LevyMPException):
    """A simulated path left every compact set (non-finite or beyond the blow-up threshold)."""

    def __init__(self, message: str, time: float, path_index: int) -> None:
        """Construct an instance of SimulationBlowUp.

        Args:
            message: Description of exception cause
            time: Grid time at which the blow-up was detected
            path_index: Index of the first offending path in its ensemble
        """
        super().__init__(message)
        self.time = time
        self.path_index = path_index


class PreconditionError(LevyMPException):
    """An operation was called outside its preconditions (off-grid times, short horizons, ...)."""


class ConfigError(LevyMPException):
    """An experiment file or configuration key is invalid."""
