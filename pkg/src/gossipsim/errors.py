class ConfigError(ValueError):
    """Invalid configuration value (bad rate, node count, scheme, ...)."""


class SimulationError(RuntimeError):
    """Internal inconsistency in the event loop (e.g. scheduling into the past)."""


class EstimationError(RuntimeError):
    """A statistic was requested before enough simulated time elapsed."""


class DivergenceError(RuntimeError):
    """A local model produced a non-finite parameter entry."""
