"""Exception hierarchy shared by the solver modules and the CLI."""


class SpecGameError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SpecGameError, ValueError):
    """Invalid parameters or scenario configuration.

    ``field`` carries a dotted path to the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class SolverError(SpecGameError):
    """A numerical routine could not produce a trustworthy answer."""


class ValidityError(SolverError, ValueError):
    """A price gap left the open interval in which both switching masses lie in (0, 1)."""

    def __init__(self, message, bound=None, value=None):
        self.bound = bound
        self.value = value
        super().__init__(message)


class DegenerateParametersError(SolverError):
    """Parameters for which the closed-form equilibrium does not exist."""


class QuadratureError(SolverError):
    """Quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)


class OracleError(SolverError):
    """Backward induction hit a singular stage game or diverging values."""
