"""Exception hierarchy.

The CLI maps these onto exit codes: ``ValidationError`` -> 1,
``TensorIOError`` (and ``OSError``) -> 2, ``NumericalError`` -> 3.
"""


class SpecBlendError(Exception):
    """Base class for all package errors."""


class ValidationError(SpecBlendError, ValueError):
    """Bad parameters, shapes or configuration."""


class ParameterError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class OracleSizeError(ValidationError):
    """The brute-force DFT refuses inputs above its size guard."""


class TensorIOError(SpecBlendError):
    """A tensor file could not be parsed."""


class FormatError(TensorIOError):
    pass


class LengthMismatchError(TensorIOError):
    pass


class UnsupportedDtypeError(TensorIOError):
    pass


class NumericalError(SpecBlendError, ArithmeticError):
    pass


class UndefinedFractionError(NumericalError):
    """Band energy fraction of a signal with zero total energy."""


class UndefinedRatioError(NumericalError):
    """Band ratio against a reference whose fraction is zero."""


class ImaginaryResidueError(NumericalError):
    """Inverse transform left a non-negligible imaginary part."""


class AnalysisError(NumericalError):
    def __init__(self, domain, message):
        super().__init__(f"{domain}: {message}")
        self.domain = domain
