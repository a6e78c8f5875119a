"""Exception types raised by qergodic."""


class QErgodicError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QErgodicError, ValueError):
    """Invalid model, measure, grid or experiment configuration."""


class ConditioningError(QErgodicError, ArithmeticError):
    """The Gram matrix of the monomial basis is numerically singular."""

    def __init__(self, degree, condition, message=None):
        self.degree = degree
        self.condition = condition
        if message is None:
            message = (
                f"Gram matrix for degree N={degree} is numerically singular "
                f"(scaled condition estimate {condition:.3e}); raise the "
                "quadrature resolution or lower N"
            )
        super().__init__(message)


class SolverError(QErgodicError, RuntimeError):
    """An iterative solver failed to converge or produced invalid output."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class RootFindingError(QErgodicError, RuntimeError):
    """Polynomial roots could not be certified by their residuals."""
