"""Exception hierarchy shared across the package."""


class InfoClockError(Exception):
    """Base class for all package errors."""


class ConfigError(InfoClockError, ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NonFiniteError(InfoClockError, ArithmeticError):
    pass


class NoSignChangeError(InfoClockError, ValueError):
    pass


class NoBracketError(InfoClockError, RuntimeError):
    pass


class OutOfDomainError(InfoClockError, ValueError):
    pass


class InadmissibleProfileError(InfoClockError, ValueError):
    """Correlation profile touches 1 (violates the finite-clock assumption)."""


class InadmissibleClockError(InfoClockError, ValueError):
    pass


class IllPosedProblemError(InfoClockError, ValueError):
    pass


class NearSingularError(InfoClockError, ArithmeticError):
    pass


class DomainError(InfoClockError, ValueError):
    """Wealth outside the utility's domain."""


class DegenerateWindowError(InfoClockError, ValueError):
    pass


class SolverError(InfoClockError, RuntimeError):
    pass
