"""Exception types raised by the ssqw package."""

__all__ = [
    "SSQWError",
    "WindowMismatch",
    "ShapeMismatch",
    "BandViolation",
    "NotUnitary",
    "InvalidParams",
    "InfeasibleProfile",
    "RankViolation",
    "OrthogonalityFailure",
    "DegenerateFrame",
    "NotAdmissible",
    "CanonicalizationError",
    "GeometryMismatch",
    "NotASymmetryCandidate",
    "NegativeRealPart",
    "SupportOverflow",
    "ParseError",
    "InvariantViolation",
]


class SSQWError(Exception):
    """Base class for all package errors."""


class WindowMismatch(SSQWError):
    pass


class ShapeMismatch(SSQWError):
    pass


class BandViolation(SSQWError):
    pass


class NotUnitary(SSQWError):
    pass


class InvalidParams(SSQWError):
    pass


class InfeasibleProfile(SSQWError):
    pass


class RankViolation(SSQWError):
    pass


class OrthogonalityFailure(SSQWError):
    pass


class DegenerateFrame(SSQWError):
    pass


class NotAdmissible(SSQWError):
    """Raised by the canonicalizer; carries the admissibility report."""

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or f"operator is not admissible: {report.summary()}")


class CanonicalizationError(SSQWError):
    pass


class GeometryMismatch(SSQWError):
    pass


class NotASymmetryCandidate(SSQWError):
    pass


class NegativeRealPart(SSQWError):
    """Suzuki input with p_x < 0 or a_x < 0; ``result`` holds the generic canonical form."""

    def __init__(self, result, message):
        self.result = result
        super().__init__(message)


class SupportOverflow(SSQWError):
    pass


class ParseError(SSQWError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantViolation(SSQWError):
    pass
