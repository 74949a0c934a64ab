"""
Error hierarchy
===============

Every failure the library reports is a ``TmdnpError``. Each class carries the
process exit code the CLI returns and the HTTP status the API responds with,
so both surfaces translate errors the same way.
"""

from typing import Any, Dict, Optional


class TmdnpError(Exception):
    """Base class for all library errors."""

    exit_code: int = 3
    http_status: int = 422

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        payload = {"error": type(self).__name__, "message": self.message}
        if self.context:
            payload["context"] = self.context
        return payload


class InvalidArgumentError(TmdnpError, ValueError):
    exit_code = 2


class OutOfRangeError(TmdnpError, ValueError):
    """|P| >= 1 where a strict polarization is required."""

    exit_code = 2


class InfiniteTemperatureError(TmdnpError):
    """Zero polarization, i.e. 1/T_s = 0.

    ``state`` optionally carries whatever the caller had already solved
    (e.g. a Borghini state with an infinite spin temperature).
    """

    def __init__(self, message: str, state: Optional[Any] = None, **context: Any):
        super().__init__(message, **context)
        self.state = state


class IndeterminateInputError(TmdnpError, ValueError):
    exit_code = 2


class ResolutionError(TmdnpError):
    pass


class NoRootError(TmdnpError):
    pass


class NumericError(TmdnpError):
    http_status = 500


class FitFailureError(TmdnpError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = diagnostics or {}

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["diagnostics"] = self.diagnostics
        return payload


class UnderdeterminedError(TmdnpError):
    pass


class NoCrossingError(TmdnpError):
    pass


class NoDataError(TmdnpError):
    pass


class UnphysicalEnhancementError(TmdnpError):
    pass


class DataFileError(TmdnpError):
    """Missing or corrupt input file."""

    exit_code = 4
    http_status = 400

    def __init__(self, message: str, path: str):
        super().__init__(message, path=path)
        self.path = path
