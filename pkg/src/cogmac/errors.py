"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so solver trouble and bad
user input stay distinguishable.
"""


class ParameterError(ValueError):
    """Invalid model or run parameter. Message names the offending key."""


class SolverError(RuntimeError):
    """A numerical routine failed to converge within its iteration cap."""


class CapacityError(ParameterError):
    """Requested state space exceeds the configured size cap."""
