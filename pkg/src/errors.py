class CurvatureLabError(Exception):
    """Base class for every error raised by the laboratory."""


class DomainError(CurvatureLabError, ValueError):
    pass


class ConfigurationError(CurvatureLabError, ValueError):
    pass


class MetricValidationError(CurvatureLabError, ValueError):
    pass


class NumericalError(CurvatureLabError, ArithmeticError):
    pass


class ConsistencyError(CurvatureLabError):
    """A computed quantity contradicts an identity or a theorem it must obey."""


class UnsupportedSpecError(CurvatureLabError):
    pass


class UnsupportedCertificationError(CurvatureLabError):
    pass


class PreconditionError(CurvatureLabError):
    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


# errors that mean "the run was set up wrong" rather than "the math failed"
USAGE_ERRORS = (
    DomainError,
    ConfigurationError,
    UnsupportedSpecError,
    UnsupportedCertificationError,
    PreconditionError,
)
