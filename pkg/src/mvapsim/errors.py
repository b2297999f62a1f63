"""Exception types shared across the simulator."""


class ZeroRateError(ValueError):
    """A link rate of zero makes the requested transfer impossible."""


class EmptyMvdSetError(ValueError):
    """At least one sensing device is required to aggregate latencies."""


class EmptyUserSetError(ValueError):
    """At least one user deadline is required to form a requirement."""


class NonStochasticRowError(ValueError):
    """A transition-matrix row does not sum to one."""


class ShapeMismatchError(ValueError):
    """Array shapes are incompatible with the target structure."""


class NonFiniteInputError(ValueError):
    """An input vector contains NaN or infinity."""


class EmptyBatchError(ValueError):
    """A training batch must contain at least one sample."""


class InvalidActionError(ValueError):
    """Action index outside the task-splitting grid."""


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""
