"""Event queue and simulated clock.

Events are totally ordered by (time, seq): seq is a monotone counter
assigned at scheduling, so simultaneous timestamps still pop in a
deterministic order.
"""

import heapq
from typing import Any, NamedTuple

from gossipsim.errors import SimulationError

# Event kinds.  Integers so tuple comparison never reaches the payload.
UPDATE_BEGIN = 0     # gradient computation starts (training mode only)
UPDATE_COMPLETE = 1  # version increments, model delta applied
GOSSIP_TRANSMIT = 2  # sender picks a target and transmits


class Event(NamedTuple):
    time: float
    seq: int
    kind: int
    node: int
    payload: Any = None


class SimClock:
    """Non-decreasing simulated time; advances only when an event pops."""

    __slots__ = ("now",)

    def __init__(self, start: float = 0.0):
        self.now = start

    def advance(self, t: float) -> None:
        if t < self.now:
            raise SimulationError(f"clock cannot move backwards: {t} < {self.now}")
        self.now = t


class EventQueue:
    """Min-heap of events with deterministic tie-breaking."""

    def __init__(self, start: float = 0.0):
        self._heap: list[Event] = []
        self._seq = 0
        self.clock = SimClock(start)

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time: float, kind: int, node: int, payload: Any = None) -> Event:
        if time < self.clock.now:
            raise SimulationError(
                f"event scheduled into the past: t={time} < now={self.clock.now}"
            )
        ev = Event(time, self._seq, kind, node, payload)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop_next(self) -> Event | None:
        """Pop the minimum (time, seq) event, or None at end-of-simulation."""
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self.clock.advance(ev.time)
        return ev
