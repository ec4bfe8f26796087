"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A solver or run configuration the method cannot accept."""


class AssumptionError(ConfigurationError):
    """Problem data violates a structural assumption the analysis needs."""


class OracleError(RuntimeError):
    """An objective oracle returned a non-finite or inconsistent value."""


class InnerSolveError(RuntimeError):
    """An inner subproblem solver failed to reach its target accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class GeneratorError(ValueError):
    """Requested test-instance parameters cannot yield a well-posed problem."""
