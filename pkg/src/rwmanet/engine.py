"""Discrete-event scheduler and the seeded random source.

Simulation time is an ``int`` count of microseconds so that equal-time
comparisons are exact on every platform.  Events at the same instant fire in
the order they were scheduled.

Random draws come from one :class:`RngStream` per run.  The generator is
CPython's Mersenne Twister (MT19937, :class:`random.Random`) seeded with a
64-bit unsigned integer, and bounded integers are produced by rejection
sampling on ``getrandbits(k)`` with ``k = (n - 1).bit_length()``: draw ``k``
bits, retry while the value is ``>= n``.  No modulo reduction is involved.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

US_PER_S = 1_000_000

#: Event target for world-level bookkeeping (not a node).
WORLD = "WORLD"


class SimulationError(RuntimeError):
    """Internal accounting or scheduling bug; aborts the run."""


def seconds(value: float | str) -> int:
    """Convert seconds to simulation time (microseconds, rounded)."""
    if isinstance(value, str):
        from decimal import Decimal

        return int((Decimal(value) * US_PER_S).to_integral_value())
    return int(round(value * US_PER_S))


def to_seconds(t: int) -> float:
    return t / US_PER_S


def format_time(t: int) -> str:
    """Fixed-point seconds with 6 decimals, independent of float repr/locale."""
    sign = "-" if t < 0 else ""
    q, r = divmod(abs(t), US_PER_S)
    return f"{sign}{q}.{r:06d}"


# --- event payloads -------------------------------------------------------


@dataclass(slots=True)
class PacketArrival:
    packet: Any


@dataclass(slots=True)
class TimerExpiry:
    timer_id: int
    context: Any = None


@dataclass(slots=True)
class TrafficInjection:
    stream_id: int


@dataclass(slots=True)
class MotionUpdate:
    node: int


@dataclass(slots=True, eq=False)
class Event:
    fire_at: int
    seq: int
    target: Hashable
    payload: Any
    cancelled: bool = field(default=False)
    fired: bool = field(default=False)

    def __repr__(self) -> str:
        return (f"Event(t={format_time(self.fire_at)}, seq={self.seq}, "
                f"target={self.target!r}, payload={self.payload!r})")


class RngStream:
    """Deterministic random source: MT19937 with unbiased bounded integers."""

    algorithm = "MT19937 (random.Random); bounded ints by getrandbits rejection"

    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = random.Random(seed)

    def index(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n < 1:
            raise ValueError("rand_uniform_index needs n >= 1")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        getbits = self._gen.getrandbits
        r = getbits(k)
        while r >= n:
            r = getbits(k)
        return r

    def uniform(self) -> float:
        return self._gen.random()


def rand_uniform_index(rng: RngStream, n: int) -> int:
    return rng.index(n)


Handler = Callable[[Event], None]


class Simulator:
    """Priority-queue event loop ordered by ``(fire_at, seq)``.

    Handlers are registered per target; ``dispatch`` falls back to
    ``default_handler`` when a target has no specific handler.
    """

    def __init__(self, seed: int = 0):
        self.now = 0
        self.rng = RngStream(seed)
        self.handlers: dict[Hashable, Handler] = {}
        self.default_handler: Handler | None = None
        self._queue: list[tuple[int, int, Event]] = []
        self._seq = 0
        self._live = 0

    @property
    def pending(self) -> int:
        return self._live

    def schedule(self, fire_at: int, target: Hashable, payload: Any) -> Event:
        if fire_at < self.now:
            raise SimulationError(
                f"event in past: fire_at={format_time(fire_at)} < now={format_time(self.now)}")
        ev = Event(fire_at, self._seq, target, payload)
        self._seq += 1
        heapq.heappush(self._queue, (fire_at, ev.seq, ev))
        self._live += 1
        return ev

    def schedule_in(self, delay: int, target: Hashable, payload: Any) -> Event:
        return self.schedule(self.now + delay, target, payload)

    def cancel(self, handle: Event) -> bool:
        if handle.cancelled or handle.fired:
            return False
        handle.cancelled = True
        self._live -= 1
        return True

    def pending_events(self):
        """Live (not cancelled) events in firing order."""
        return [ev for _, _, ev in sorted(self._queue) if not ev.cancelled]

    def run_until(self, t_end: int) -> int:
        if t_end < self.now:
            raise SimulationError("run_until target is before the current time")
        queue = self._queue
        handlers = self.handlers
        processed = 0
        while queue and queue[0][0] <= t_end:
            fire_at, _, ev = heapq.heappop(queue)
            if ev.cancelled:
                continue
            self.now = fire_at
            ev.fired = True
            self._live -= 1
            handler = handlers.get(ev.target, self.default_handler)
            if handler is None:
                raise SimulationError(f"no handler for target {ev.target!r}: {ev!r}")
            try:
                handler(ev)
            except SimulationError as exc:
                if getattr(exc, "_located", False):
                    raise
                err = SimulationError(f"at t={format_time(fire_at)} while handling {ev!r}: {exc}")
                err._located = True
                raise err from exc
            except Exception as exc:
                err = SimulationError(f"at t={format_time(fire_at)} while handling {ev!r}: {exc!r}")
                err._located = True
                raise err from exc
            processed += 1
        self.now = t_end
        return processed
