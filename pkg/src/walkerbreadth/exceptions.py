"""Exception hierarchy.

Every error raised on purpose by the package derives from ``WalkerError`` so
callers (the CLI in particular) can separate configuration problems from
numerical failures.
"""


class WalkerError(Exception):
    """Base class for all package errors."""


class ConfigError(WalkerError):
    """Invalid user input: bad expression, unsupported option, bad schema."""


class NumericalError(WalkerError):
    """A computation could not be completed at the requested accuracy."""


class ExpressionSyntaxError(ConfigError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) of the offending token.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.message = message
        self.offset = offset


class UnknownIdentifier(ConfigError):
    def __init__(self, name, offset, where=None):
        prefix = f"{where}: " if where else ""
        super().__init__(f"{prefix}unknown identifier {name!r} at byte offset {offset}")
        self.name = name
        self.offset = offset
        self.where = where


class FieldSingular(NumericalError):
    """Expression evaluated to a non-finite value (pole, log of non-positive...)."""


class BasePointMismatch(WalkerError):
    pass


class NullSegment(NumericalError):
    pass


class NullTangent(NumericalError):
    pass


class DegenerateCurvature(NumericalError):
    pass


class FrameDriftExceeded(NumericalError):
    pass


class DegeneratePatch(NumericalError):
    pass


class NotTimelikeSurface(NumericalError):
    pass


class CurveOffSurface(NumericalError):
    pass


class HyperbolicDomain(NumericalError):
    pass


class UnsupportedCombination(ConfigError):
    pass


class StepTooLarge(NumericalError):
    pass


class BranchAmbiguous(NumericalError):
    pass


class GridMismatch(WalkerError):
    pass


class HypothesisUnsatisfiable(WalkerError):
    pass
