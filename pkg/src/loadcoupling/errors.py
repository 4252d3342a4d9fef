"""Exception hierarchy shared by the solvers, the scenario reader and the CLI."""


class LoadCouplingError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LoadCouplingError, ValueError):
    """An input lies outside the domain of a model function."""


class ScenarioError(LoadCouplingError, ValueError):
    """A scenario file or in-memory scenario violates the schema or an invariant."""


class UnsatisfiableError(LoadCouplingError):
    """The rate vector admits no positive load for any power (spectral radius >= 1)."""

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class NotImplementableError(LoadCouplingError):
    """No positive power realizes the requested load vector."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PowerDivergenceError(NotImplementableError):
    """A per-cell bisection could not find a power with eta < 1 below the divergence threshold."""
