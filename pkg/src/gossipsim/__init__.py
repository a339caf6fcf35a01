"""Discrete-event simulator for asynchronous decentralized learning over gossip."""

from gossipsim.errors import ConfigError, DivergenceError, EstimationError, SimulationError

__all__ = [
    "ConfigError",
    "DivergenceError",
    "EstimationError",
    "SimulationError",
]

__version__ = "0.1.0"
