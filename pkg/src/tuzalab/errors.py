"""Exception hierarchy shared by the whole package."""


class TuzaLabError(Exception):
    """Base class for all package errors."""


class GraphSizeError(TuzaLabError, ValueError):
    """A construction would exceed the representable vertex count."""


class InstanceTooLargeError(TuzaLabError):
    """An exact solver or enumerator refused an instance above its cap."""


class LPIterationLimitError(TuzaLabError):
    """The simplex core hit its iteration cap (numerical trouble)."""


class FeasibilityError(TuzaLabError):
    """A constructed certificate failed its own feasibility check."""


class ConfigurationError(TuzaLabError, ValueError):
    """Invalid experiment parameters or an invalid configuration."""
