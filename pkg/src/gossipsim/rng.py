"""Deterministic, splittable random streams and the shifted-exponential sampler.

Every random decision in a run is drawn from a stream keyed by
(seed, node, purpose).  Streams with distinct keys are statistically
independent, so adding a new consumer (extra instrumentation, a new
purpose tag) never perturbs existing ones.
"""

import math
from dataclasses import dataclass

import numpy as np

from gossipsim.errors import ConfigError

# Stable purpose -> integer mapping; the spawn key of a stream is
# (node, purpose id).  Order matters for reproducibility: never reorder,
# only append.
PURPOSES = {
    "update": 0,     # inter-update availability waits
    "gossip": 1,     # inter-transmission waits
    "target": 2,     # uniform peer selection
    "beta": 3,       # mixing coefficient draws (receiver side)
    "batch": 4,      # mini-batch index draws
    "wstar": 5,      # ground-truth parameter vectors (node slot = distribution id)
    "mixture": 6,    # feature draws for a shard
    "noise": 7,      # optional label noise
}


def make_stream(seed: int, node: int, purpose: str) -> np.random.Generator:
    """Return the generator for stream (seed, node, purpose).

    Identical keys always yield identical sequences.
    """
    try:
        pid = PURPOSES[purpose]
    except KeyError:
        raise ConfigError(f"unknown stream purpose {purpose!r}") from None
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(node, pid))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ShiftedExponential:
    """Deterministic delay plus an exponential wait.

    Models both the update timing (shift=c_i, rate=mu_i) and the gossip
    timing (shift=d_i, rate=lambda_i).
    """

    shift: float
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ConfigError(f"rate must be positive, got {self.rate}")
        if self.shift < 0:
            raise ConfigError(f"shift must be non-negative, got {self.shift}")

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate


def sample_shifted_exp(stream: np.random.Generator, dist: ShiftedExponential) -> float:
    """Draw shift + Exp(rate) by inverse CDF on a uniform; always > 0."""
    u = stream.random()
    while u == 0.0:  # keep the sample strictly positive
        u = stream.random()
    return dist.shift - math.log1p(-u) / dist.rate
