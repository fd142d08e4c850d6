"""Exception hierarchy shared by all modules.

Every exception derives from :class:`FracHardyError` so the CLI can map
failures to exit codes without catching unrelated bugs.
"""


class FracHardyError(Exception):
    """Base class for library errors."""


class DomainError(FracHardyError, ValueError):
    """Argument outside the admissible parameter range (Gamma poles included)."""


class QuadratureError(FracHardyError):
    """Estimated quadrature error exceeds the requested tolerance."""


class CalibrationError(FracHardyError):
    """Cross-backend calibration residual exceeds tolerance."""


class ConvergenceError(FracHardyError):
    """Iterative solver did not converge or diverged."""


class CoercivityError(FracHardyError):
    """Discrete quadratic form is not positive definite."""


class ExtrapolationError(FracHardyError):
    """Successive flux estimates do not settle."""


class FitQualityError(FracHardyError):
    """Log-log regression is too poor to report an exponent."""


class TheoryForbidden(FracHardyError):
    """Requested configuration lies in the nonexistence regime."""
