"""Node timing configuration and the two gossip schemes' shared pieces."""

from dataclasses import dataclass

import numpy as np

from gossipsim.errors import ConfigError

UNIFORM = "uniform"
OPPORTUNISTIC = "opportunistic"


@dataclass(frozen=True)
class NodeConfig:
    """Per-node rates and deterministic delays.

    mu / c drive the update process (exponential availability wait plus
    gradient-computation delay c); lam / d drive the gossip process.
    d defaults to 0: the pairwise analysis folds it into the exponential
    wait for large n.
    """

    mu: float
    c: float = 0.0
    lam: float = 1.0
    d: float = 0.0

    def __post_init__(self):
        if self.mu <= 0 or self.lam <= 0:
            raise ConfigError("mu and lambda must be positive")
        if self.c < 0 or self.d < 0:
            raise ConfigError("c and d must be non-negative")


@dataclass(frozen=True)
class SchemeConfig:
    variant: str = UNIFORM
    # Opportunistic only: the whole network's capacity, normally sum(lam_i);
    # the current freshest node transmits alone at this rate.
    total_capacity: float | None = None
    # Opportunistic staleness accounting: by default a transmission resets
    # only the sender's own source row at the receiver (the sender is the
    # freshest node for its own model, and nothing else is guaranteed
    # fresh).  With relay_versions the transmission carries the sender's
    # whole version column instead; relaying collapses staleness to O(1)
    # even at low capacity, so the lower-bound regime is only visible
    # without it.
    relay_versions: bool = False

    def __post_init__(self):
        if self.variant not in (UNIFORM, OPPORTUNISTIC):
            raise ConfigError(f"unknown gossip scheme {self.variant!r}")
        if self.variant == OPPORTUNISTIC:
            if self.total_capacity is None or self.total_capacity <= 0:
                raise ConfigError("opportunistic scheme needs total_capacity > 0")


def select_target(i: int, n: int, stream: np.random.Generator) -> int:
    """Uniform draw over the n-1 nodes other than i."""
    if n < 2:
        raise ConfigError("target selection needs at least two nodes")
    # Floor of a uniform float: ~6x cheaper per draw than Generator.integers
    # on the scalar path, identical law up to float64 granularity.
    j = int(stream.random() * (n - 1))
    return j if j < i else j + 1
