"""Exception hierarchy shared across the package."""


class LuderscopeError(Exception):
    pass


class DimensionError(LuderscopeError, ValueError):
    pass


class DomainError(LuderscopeError, ValueError):
    pass


class NotPSDError(DomainError):
    pass


class NumericError(LuderscopeError, ArithmeticError):
    pass


class UndefinedPostStateError(DomainError):
    """Raised when the requested outcome has (numerically) zero probability."""


class UndefinedAdvantageError(DomainError):
    """Raised when the measurement distance vanishes, so the ratio is undefined."""


class EnsembleFormatError(LuderscopeError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SolverError(LuderscopeError, RuntimeError):
    pass
