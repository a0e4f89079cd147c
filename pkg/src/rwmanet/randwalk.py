"""Random-walk forwarding with per-hop neighbor probing.

At every hop the holder broadcasts a one-hop PROBE and collects
PROBE_REPLY senders into a queue until a timer fires.  If the destination
replied, the packet goes straight to it.  Otherwise it goes to a neighbor
picked uniformly from the queue.  A packet whose TTL reaches zero away from
its destination is dropped as TTL_EXHAUSTED.  That drop is the explicit
"don't know" outcome: a packet is never handed to the wrong node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Event, Simulator, TimerExpiry
from .traffic import DropReason, MetricsLog
from .world import BROADCAST, Channel, Kind, Packet


@dataclass(frozen=True)
class RandWalkConfig:
    collect_window: int = 30_000  # microseconds
    max_ttl: int = 64
    exclude_prev_hop: bool = False
    # False turns off the destination shortcut: the destination is then only
    # reached when the uniform draw picks it (a simple random walk).
    direct_delivery: bool = True

    def __post_init__(self):
        if self.collect_window <= 0:
            raise ValueError("collect_window must be positive")
        if self.max_ttl < 1:
            raise ValueError("max_ttl must be >= 1")


@dataclass
class PendingForward:
    packet: Packet
    probe_id: int
    queue: list[int] = field(default_factory=list)
    timer: Event | None = None
    probed: int = 0  # neighbors the probe reached


class RandomWalkRouting:
    name = "randwalk"

    def __init__(self, sim: Simulator, channel: Channel, metrics: MetricsLog,
                 config: RandWalkConfig | None = None, trace: bool = False):
        self.sim = sim
        self.channel = channel
        self.metrics = metrics
        self.config = config or RandWalkConfig()
        self.pending: list[dict[int, PendingForward]] = [{} for _ in channel.world.nodes]
        self._next_probe = 0
        # (node, neighbors probed, replies sent back) per DATA hop, and
        # (node, chosen next hop) per forwarding decision; only with trace=True
        self.trace = trace
        self.probe_log: list[tuple[int, int]] = []
        self.forward_log: list[tuple[int, int]] = []
        self.replies_sent = 0

    @property
    def initial_ttl(self) -> int:
        return self.config.max_ttl

    def held_packets(self) -> int:
        return sum(len(p) for p in self.pending)

    def receive(self, node: int, packet: Packet) -> None:
        kind = packet.kind
        if kind is Kind.DATA:
            self.on_data(node, packet)
        elif kind is Kind.PROBE:
            self.on_probe(node, packet)
        elif kind is Kind.PROBE_REPLY:
            self.on_probe_reply(node, packet)
        # AODV control frames are ignored

    originate = receive

    def on_data(self, node: int, packet: Packet) -> None:
        now = self.sim.now
        if node == packet.final_dst:
            self.metrics.delivered(now, packet, node)
            return
        if packet.ttl <= 0:
            self.metrics.dropped(now, packet, node, DropReason.TTL_EXHAUSTED)
            return
        probe_id = self._next_probe
        self._next_probe += 1
        entry = PendingForward(packet, probe_id)
        self.pending[node][probe_id] = entry
        probe = Packet(Kind.PROBE, node, BROADCAST, packet.uid, ttl=1, payload_size=0,
                       created_at=now, probe_id=probe_id)
        receivers = self.channel.transmit(node, BROADCAST, probe)
        entry.probed = len(receivers)
        entry.timer = self.sim.schedule(now + self.config.collect_window, node,
                                        TimerExpiry(probe_id, "collect"))

    def on_probe(self, node: int, probe: Packet) -> None:
        reply = Packet(Kind.PROBE_REPLY, node, probe.prev_hop, probe.uid, ttl=1,
                       created_at=self.sim.now, probe_id=probe.probe_id, replier=node)
        self.replies_sent += 1
        self.channel.transmit(node, probe.prev_hop, reply)  # LINK_FAIL: reply lost

    def on_probe_reply(self, node: int, reply: Packet) -> None:
        entry = self.pending[node].get(reply.probe_id)
        if entry is None:
            return  # late reply, queue already consumed
        if reply.replier not in entry.queue:
            entry.queue.append(reply.replier)

    def on_timer(self, node: int, timer: TimerExpiry) -> None:
        entry = self.pending[node].pop(timer.timer_id, None)
        if entry is None:
            return
        self.on_collect_timer(node, entry)

    def on_collect_timer(self, node: int, entry: PendingForward) -> None:
        packet = entry.packet
        now = self.sim.now
        queue = entry.queue
        if self.trace:
            self.probe_log.append((node, entry.probed))
        if self.config.exclude_prev_hop and len(queue) > 1 and packet.prev_hop in queue:
            queue = [n for n in queue if n != packet.prev_hop]
        if self.config.direct_delivery and packet.final_dst in queue:
            nxt = packet.final_dst
        elif not queue:
            self.metrics.dropped(now, packet, node, DropReason.NO_NEIGHBOR)
            return
        else:
            nxt = queue[self.sim.rng.index(len(queue))]
        if self.trace:
            self.forward_log.append((node, nxt))
        packet.ttl -= 1
        if not self.channel.transmit(node, nxt, packet):
            self.metrics.dropped(now, packet, node, DropReason.LINK_BREAK)
