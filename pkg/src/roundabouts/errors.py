"""Exception hierarchy shared by the generators, the OpenDRIVE layer and the CLI."""

from __future__ import annotations


class RoundaboutError(Exception):
    """Base class for every error raised by this package."""


class DegenerateInputError(RoundaboutError, ValueError):
    """Input geometry is degenerate (too few points, collinear, coincident)."""


class InfeasibleLayoutError(RoundaboutError):
    """The incident road layout cannot be turned into a valid roundabout."""


class ValidationFailedError(RoundaboutError):
    """A generated network violates the link/clearance rules."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = "" if len(self.violations) <= 3 else f" (+{len(self.violations) - 3} more)"
        super().__init__(f"{len(self.violations)} validation violation(s): {head}{more}")


class EmptyNetworkError(RoundaboutError, ValueError):
    """An operation that needs roads was given an empty network."""


class OpenDriveParseError(RoundaboutError):
    """Base class for problems reading an OpenDRIVE document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedXMLError(OpenDriveParseError):
    pass


class MissingAttributeError(OpenDriveParseError):
    pass


class UnsupportedGeometryError(OpenDriveParseError):
    pass
