"""Exception and warning types shared across the package."""


class LesoError(Exception):
    """Base class for all errors raised by lesolab."""


class DimensionError(LesoError, ValueError):
    """Matrix or vector shapes do not agree."""


class AssumptionError(LesoError):
    """The plant violates observability or the invariant-zero condition."""


class SingularTransformError(LesoError):
    """The observability matrix cannot be inverted numerically."""


class UnobservableError(LesoError):
    """Observer gains requested for an unobservable (A, C) pair."""


class ImproperTransferFunctionError(LesoError, ValueError):
    """Transfer function is not strictly proper (or denominator not monic)."""


class SimulationError(LesoError):
    """A simulated signal became non-finite."""


class DivergenceError(LesoError):
    """Learner parameters blew up past the divergence threshold."""


class NoStepError(LesoError, ValueError):
    """compute_metrics could not find a reference step at the requested time."""


class ConfigError(LesoError, ValueError):
    """Scenario file is malformed or contains unknown keys."""


class IllConditionedWarning(UserWarning):
    """Gain placement solved a badly conditioned coefficient system."""
