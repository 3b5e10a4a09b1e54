"""Exception types raised across the package."""


class SaddleScarError(Exception):
    """Base class for all package errors."""


class ParameterError(SaddleScarError, ValueError):
    pass


class DomainError(SaddleScarError, ValueError):
    """Evaluation requested outside a potential's declared domain."""


class NumericError(SaddleScarError, ArithmeticError):
    """Non-finite values or an eigensolver that failed."""


class ConvergenceError(NumericError):
    pass


class SingularityError(NumericError):
    pass


class NotASaddleError(SaddleScarError, ValueError):
    pass


class OrbitError(SaddleScarError):
    """Orbit does not close to tolerance, or leaves its axis."""


class ValidityError(SaddleScarError, ValueError):
    """Point lies outside the region where the semiclassical model is trusted."""


class AccuracyError(NumericError):
    pass


class ResolutionError(SaddleScarError, ValueError):
    pass


class InsufficientSignalError(SaddleScarError):
    pass


class SelectionError(SaddleScarError, LookupError):
    pass


class GeometryError(SaddleScarError, ValueError):
    pass


class ConfigError(SaddleScarError, ValueError):
    pass
