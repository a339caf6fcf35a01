"""The single-timeline event loop tying timing, gossip and learning together.

One Simulation instance owns one run: an event queue, a staleness engine
and (in training mode) the per-node models.  Runs are shared-nothing, so
different sweep points can execute concurrently elsewhere.

Update cycle per node i: wait Exp(mu_i), compute gradients for c_i, then
apply the delta and bump the version.  In training mode the gradient is
taken at the snapshot when computation starts; the delta lands on the
then-current parameters c_i later, so mixes in between are preserved.

Uniform scheme: every node transmits after d_i + Exp(lam_i) waits to a
uniform random peer.  Opportunistic scheme: only the most recent
self-updater transmits, as a Poisson process at the full network
capacity; the token moves instantly on every update and pending
transmissions of the old holder are invalidated by a generation counter.
"""

import math
from dataclasses import dataclass

import numpy as np

from gossipsim.errors import ConfigError, DivergenceError
from gossipsim.events import (
    GOSSIP_TRANSMIT,
    UPDATE_BEGIN,
    UPDATE_COMPLETE,
    EventQueue,
)
from gossipsim.learning import HyperParams, local_update, mix
from gossipsim.protocols import OPPORTUNISTIC, UNIFORM, NodeConfig, SchemeConfig, select_target
from gossipsim.rng import ShiftedExponential, make_stream, sample_shifted_exp
from gossipsim.staleness import StalenessEngine, StalenessStats


class TrainingState:
    """Per-node parameters and the SGD/mixing plumbing for one run."""

    def __init__(self, kind, shards, hyper: HyperParams, seed: int):
        n = len(shards)
        d = shards[0].X.shape[1]
        self.kind = kind
        self.shards = shards
        self.hyper = hyper
        # Common zero initialization at every node.
        self.theta = [np.zeros(d) for _ in range(n)]
        self.steps = [0] * n
        self.diverged = [False] * n
        self._batch = [make_stream(seed, i, "batch") for i in range(n)]
        self._beta = [make_stream(seed, i, "beta") for i in range(n)]

    def compute_delta(self, i: int) -> np.ndarray | None:
        """Snapshot-trajectory delta for node i's next update, or None if it diverged."""
        shard = self.shards[i]
        try:
            new = local_update(
                self.kind,
                self.theta[i],
                shard.X,
                shard.y,
                self.hyper,
                self._batch[i],
                base_step=self.steps[i],
            )
        except DivergenceError:
            self.diverged[i] = True
            return None
        self.steps[i] += self.hyper.tau
        return new - self.theta[i]

    def apply_delta(self, i: int, delta: np.ndarray) -> None:
        self.theta[i] = self.theta[i] + delta

    def receive(self, receiver: int, sender: int) -> None:
        self.theta[receiver] = mix(
            self.theta[receiver], self.theta[sender], self._beta[receiver]
        )

    def any_diverged(self) -> bool:
        return any(self.diverged)


@dataclass
class SimResult:
    staleness: StalenessStats | None
    updates_per_node: np.ndarray
    transmit_counts: np.ndarray          # [sender, receiver] transmissions
    token_time: np.ndarray | None        # opportunistic: time each node held the token
    end_time: float


class Simulation:
    def __init__(
        self,
        nodes: list[NodeConfig],
        scheme: SchemeConfig,
        seed: int,
        horizon: float = math.inf,
        burn_in: float = 0.0,
        training: TrainingState | None = None,
        max_updates: int | None = None,
        checkpoint=None,
    ):
        n = len(nodes)
        if n < 1:
            raise ConfigError("need at least one node")
        if not math.isfinite(horizon) and max_updates is None:
            raise ConfigError("need a finite horizon or a max update count")
        self.nodes = nodes
        self.scheme = scheme
        self.n = n
        self.seed = seed
        self.horizon = horizon
        self.training = training
        self.max_updates = max_updates
        self.checkpoint = checkpoint  # called as checkpoint(epoch, sim_time)
        self.queue = EventQueue()
        self.engine = StalenessEngine(n, burn_in=burn_in)
        self.transmit_counts = np.zeros((n, n), dtype=np.int64)
        self.updates_per_node = np.zeros(n, dtype=np.int64)
        self._update_dists = [ShiftedExponential(0.0, nc.mu) for nc in nodes]
        self._gossip_dists = [ShiftedExponential(nc.d, nc.lam) for nc in nodes]
        self._update_streams = [make_stream(seed, i, "update") for i in range(n)]
        self._gossip_streams = [make_stream(seed, i, "gossip") for i in range(n)]
        self._target_streams = [make_stream(seed, i, "target") for i in range(n)]
        # Opportunistic token state.
        self.token_holder: int | None = None
        self._token_gen = 0
        self._token_since = 0.0
        self.token_time = (
            np.zeros(n, dtype=np.float64) if scheme.variant == OPPORTUNISTIC else None
        )

    # -- scheduling helpers ----------------------------------------------

    def _schedule_update(self, i: int, t: float) -> None:
        wait = sample_shifted_exp(self._update_streams[i], self._update_dists[i])
        c = self.nodes[i].c
        if self.training is not None:
            self.queue.schedule(t + wait, UPDATE_BEGIN, i)
        else:
            self.queue.schedule(t + wait + c, UPDATE_COMPLETE, i)

    def _schedule_gossip_uniform(self, i: int, t: float) -> None:
        wait = sample_shifted_exp(self._gossip_streams[i], self._gossip_dists[i])
        self.queue.schedule(t + wait, GOSSIP_TRANSMIT, i)

    def _schedule_gossip_opportunistic(self, i: int, t: float) -> None:
        cap = self.scheme.total_capacity
        wait = -math.log1p(-self._gossip_streams[i].random()) / cap
        self.queue.schedule(t + wait, GOSSIP_TRANSMIT, i, payload=self._token_gen)

    def _take_token(self, i: int, t: float) -> None:
        if self.token_holder is not None:
            self.token_time[self.token_holder] += t - self._token_since
        self.token_holder = i
        self._token_since = t
        self._token_gen += 1  # invalidates the previous holder's pending sends
        self._schedule_gossip_opportunistic(i, t)

    # -- event handlers ----------------------------------------------------

    def _complete_update(self, i: int, t: float, delta) -> None:
        if self.training is not None and delta is not None:
            self.training.apply_delta(i, delta)
        self.engine.record_self_update(i, t)
        self.updates_per_node[i] += 1
        if self.scheme.variant == OPPORTUNISTIC:
            self._take_token(i, t)
        self._schedule_update(i, t)
        if self.checkpoint is not None:
            total = int(self.updates_per_node.sum())
            if total % self.n == 0:
                self.checkpoint(total // self.n, t)

    def _transmit(self, i: int, t: float) -> None:
        j = select_target(i, self.n, self._target_streams[i])
        if self.scheme.variant == OPPORTUNISTIC and not self.scheme.relay_versions:
            self.engine.merge_source_row(i, j, t)
        else:
            self.engine.merge_on_gossip(i, j, t)
        if self.training is not None:
            self.training.receive(j, i)
        self.transmit_counts[i, j] += 1

    # -- main loop -----------------------------------------------------

    def run(self) -> SimResult:
        n = self.n
        uniform = self.scheme.variant == UNIFORM
        for i in range(n):
            self._schedule_update(i, 0.0)
            if uniform and n >= 2:
                self._schedule_gossip_uniform(i, 0.0)

        end = self.horizon
        pop = self.queue.pop_next
        while True:
            if self.max_updates is not None and self.updates_per_node.sum() >= self.max_updates:
                end = self.queue.clock.now
                break
            ev = pop()
            if ev is None:
                end = min(self.queue.clock.now, self.horizon)
                break
            if ev.time > self.horizon:
                end = self.horizon
                break
            kind = ev.kind
            if kind == GOSSIP_TRANSMIT:
                if uniform:
                    self._transmit(ev.node, ev.time)
                    self._schedule_gossip_uniform(ev.node, ev.time)
                elif ev.payload == self._token_gen:  # else: cancelled holder
                    self._transmit(ev.node, ev.time)
                    self._schedule_gossip_opportunistic(ev.node, ev.time)
            elif kind == UPDATE_COMPLETE:
                self._complete_update(ev.node, ev.time, ev.payload)
            else:  # UPDATE_BEGIN: snapshot gradient, apply after c_i
                delta = self.training.compute_delta(ev.node)
                self.queue.schedule(
                    ev.time + self.nodes[ev.node].c, UPDATE_COMPLETE, ev.node, payload=delta
                )

        if self.token_time is not None and self.token_holder is not None:
            self.token_time[self.token_holder] += end - self._token_since
            self._token_since = end
        self.engine.finalize(end)
        stats = None
        if n >= 2 and end > max(self.engine.burn_in, self.engine.start):
            stats = self.engine.time_average()
        return SimResult(
            staleness=stats,
            updates_per_node=self.updates_per_node,
            transmit_counts=self.transmit_counts,
            token_time=self.token_time,
            end_time=end,
        )
