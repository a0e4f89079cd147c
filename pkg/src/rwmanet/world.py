"""Node motion, unit-disk connectivity and packet transmission."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .engine import PacketArrival, Simulator, SimulationError, seconds

BROADCAST = -1


class Kind(enum.Enum):
    DATA = "DATA"
    PROBE = "PROBE"
    PROBE_REPLY = "PROBE_REPLY"
    RREQ = "RREQ"
    RREP = "RREP"


@dataclass(slots=True)
class Packet:
    kind: Kind
    origin: int
    final_dst: int
    uid: int
    ttl: int = 0
    hops_taken: int = 0
    payload_size: int = 0
    prev_hop: int | None = None
    created_at: int = 0
    # PROBE / PROBE_REPLY
    probe_id: int | None = None
    replier: int | None = None
    # RREQ / RREP
    rreq_id: int | None = None
    origin_seq: int | None = None
    dst_seq: int | None = None
    route_dst: int | None = None

    def forwarded(self, sender: int) -> "Packet":
        """Copy as seen by a receiver of one transmission by ``sender``."""
        return Packet(self.kind, self.origin, self.final_dst, self.uid, self.ttl,
                      self.hops_taken + 1, self.payload_size, sender, self.created_at,
                      self.probe_id, self.replier, self.rreq_id, self.origin_seq,
                      self.dst_seq, self.route_dst)


@dataclass(frozen=True, slots=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")

    def distance(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True, slots=True)
class Motion:
    """Straight-line leg from ``origin`` to ``destination`` at constant speed."""

    origin: Position
    destination: Position
    start: int
    speed: float

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError("motion speed must be positive")

    @property
    def duration(self) -> int:
        return seconds(self.origin.distance(self.destination) / self.speed)

    @property
    def arrival(self) -> int:
        return self.start + self.duration

    def position_at(self, t: int) -> Position:
        if t <= self.start:
            return self.origin
        dur = self.duration
        if dur == 0 or t >= self.start + dur:
            return self.destination
        f = (t - self.start) / dur
        o, d = self.origin, self.destination
        return Position(o.x + (d.x - o.x) * f, o.y + (d.y - o.y) * f)


@dataclass(frozen=True, slots=True)
class RadioModel:
    range_m: float = 250.0
    hop_delay: int = 2_000  # microseconds

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError("radio range must be positive")
        if not self.hop_delay > 0:
            raise ValueError("hop delay must be positive")


@dataclass(frozen=True, slots=True)
class Move:
    """Scenario-level move directive; the leg origin is wherever the node is."""

    node: int
    start: int
    to: Position
    speed: float


class World:
    """Closed-form node positions and the unit-disk neighbor relation.

    Range is inclusive: nodes at exactly ``range_m`` are neighbors.
    """

    def __init__(self, positions: Sequence[Position], moves: Sequence[Move] = (),
                 radio: RadioModel | None = None):
        self.initial = list(positions)
        self.radio = radio or RadioModel()
        self.n = len(self.initial)
        self.legs: list[list[Motion]] = [[] for _ in range(self.n)]
        for mv in sorted(moves, key=lambda m: (m.node, m.start)):
            if not 0 <= mv.node < self.n:
                raise ValueError(f"unknown node {mv.node}")
            legs = self.legs[mv.node]
            if legs and mv.start < legs[-1].arrival:
                raise ValueError(f"node {mv.node}: move at t={mv.start}us overlaps previous leg")
            origin = legs[-1].destination if legs else self.initial[mv.node]
            legs.append(Motion(origin, mv.to, mv.start, mv.speed))
        self._cache_t: int | None = None
        self._cache_pos: list[Position] = []

    @property
    def nodes(self) -> range:
        return range(self.n)

    def is_static(self) -> bool:
        return not any(self.legs)

    def max_speed(self, node: int) -> float:
        return max((leg.speed for leg in self.legs[node]), default=0.0)

    def position_at(self, node: int, t: int) -> Position:
        if not 0 <= node < self.n:
            raise KeyError(f"unknown node {node}")
        legs = self.legs[node]
        if not legs:
            return self.initial[node]
        if t < legs[0].start:
            return legs[0].origin
        for leg in reversed(legs):
            if t >= leg.start:
                return leg.position_at(t)
        return legs[0].origin  # unreachable

    def positions_at(self, t: int) -> list[Position]:
        if self._cache_t != t:
            self._cache_pos = [self.position_at(i, t) for i in range(self.n)]
            self._cache_t = t
        return self._cache_pos

    def distance(self, a: int, b: int, t: int) -> float:
        pos = self.positions_at(t)
        return pos[a].distance(pos[b])

    def in_range(self, a: int, b: int, t: int) -> bool:
        if a == b:
            raise ValueError("a node is not its own neighbor")
        return self.distance(a, b, t) <= self.radio.range_m

    def neighbors_of(self, node: int, t: int) -> list[int]:
        pos = self.positions_at(t)
        p = pos[node]
        r = self.radio.range_m
        return [j for j, q in enumerate(pos)
                if j != node and math.hypot(p.x - q.x, p.y - q.y) <= r]

    def adjacency(self, t: int = 0) -> list[list[bool]]:
        return [[i != j and self.in_range(i, j, t) for j in range(self.n)]
                for i in range(self.n)]

    def arrival_times(self) -> list[tuple[int, int]]:
        return sorted((leg.arrival, node) for node, legs in enumerate(self.legs) for leg in legs)


class Channel:
    """Ideal shared medium over a :class:`World`.

    Receivers are decided at send time; every receiver gets a
    ``PacketArrival`` exactly ``hop_delay`` later.  A unicast to a node out of
    range returns ``False`` (link-layer feedback) and schedules nothing.
    """

    def __init__(self, world: World, sim: Simulator):
        self.world = world
        self.sim = sim
        self.tx: Counter = Counter()
        self.rx: Counter = Counter()
        self.link_failures: Counter = Counter()

    def transmit(self, src: int, dst: int, packet: Packet) -> bool | list[int]:
        """Send ``packet`` from ``src``.

        Broadcast returns the receiver list; unicast returns whether the frame
        went out.
        """
        sim = self.sim
        t = sim.now
        delay = self.world.radio.hop_delay
        if dst == BROADCAST:
            receivers = self.world.neighbors_of(src, t)
            self.tx[packet.kind] += 1
            for j in receivers:
                sim.schedule(t + delay, j, PacketArrival(packet.forwarded(src)))
            self.rx[packet.kind] += len(receivers)
            return receivers
        if dst == src:
            raise SimulationError(f"node {src} unicasting to itself")
        if not self.world.in_range(src, dst, t):
            self.link_failures[packet.kind] += 1
            return False
        self.tx[packet.kind] += 1
        self.rx[packet.kind] += 1
        sim.schedule(t + delay, dst, PacketArrival(packet.forwarded(src)))
        return True
