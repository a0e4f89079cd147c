"""AODV-lite: flooded RREQ, RREP back along the reverse path, route table.

Left out on purpose: HELLO beacons, RERR, intermediate-node RREP, route
lifetimes and expanding-ring search.  Broken links are detected only through
unicast link-layer feedback.

The originating node buffers DATA while discovery runs.  A transit node that
cannot forward (no route, or the next hop is gone) drops the packet, as in
RFC 3561 without local repair.  Without RERR the source keeps using its
route until its own first hop fails.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

from .engine import Simulator, TimerExpiry
from .traffic import DropReason, MetricsLog
from .world import BROADCAST, Channel, Kind, Packet


@dataclass(frozen=True)
class AodvConfig:
    rreq_ttl: int = 16
    buffer: int = 64
    # an unanswered discovery may be restarted by a DATA packet arriving
    # this long after it began
    discovery_timeout: int = 100_000  # microseconds
    data_ttl: int = 64

    def __post_init__(self):
        if self.rreq_ttl < 1 or self.buffer < 1 or self.data_ttl < 1:
            raise ValueError("rreq_ttl, buffer and data_ttl must be >= 1")
        if self.discovery_timeout <= 0:
            raise ValueError("discovery_timeout must be positive")


@dataclass
class RouteEntry:
    dst: int
    next_hop: int
    hop_count: int
    dst_seq: int
    valid: bool = True


@dataclass
class AodvNode:
    seq: int = 0
    rreq_id: int = 0
    table: dict[int, RouteEntry] = field(default_factory=dict)
    seen: set[tuple[int, int]] = field(default_factory=set)
    buffers: dict[int, deque] = field(default_factory=dict)
    discovering: dict[int, int] = field(default_factory=dict)  # dst -> start time


class AodvRouting:
    name = "aodv"

    def __init__(self, sim: Simulator, channel: Channel, metrics: MetricsLog,
                 config: AodvConfig | None = None):
        self.sim = sim
        self.channel = channel
        self.metrics = metrics
        self.config = config or AodvConfig()
        self.nodes = [AodvNode() for _ in channel.world.nodes]
        self.discoveries = 0

    @property
    def initial_ttl(self) -> int:
        return self.config.data_ttl

    def held_packets(self) -> int:
        return sum(len(q) for st in self.nodes for q in st.buffers.values())

    def route_lookup(self, node: int, dst: int) -> RouteEntry | None:
        entry = self.nodes[node].table.get(dst)
        return entry if entry is not None and entry.valid else None

    def receive(self, node: int, packet: Packet) -> None:
        kind = packet.kind
        if kind is Kind.DATA:
            self.on_data_aodv(node, packet)
        elif kind is Kind.RREQ:
            self.on_rreq(node, packet)
        elif kind is Kind.RREP:
            self.on_rrep(node, packet)

    originate = receive

    def on_timer(self, node: int, timer: TimerExpiry) -> None:
        pass  # no timers in AODV-lite

    def _install(self, node: int, dst: int, next_hop: int, hop_count: int, dst_seq: int) -> None:
        table = self.nodes[node].table
        old = table.get(dst)
        if (old is None or dst_seq > old.dst_seq
                or (dst_seq == old.dst_seq and (not old.valid or hop_count < old.hop_count))):
            table[dst] = RouteEntry(dst, next_hop, hop_count, dst_seq)

    def on_data_aodv(self, node: int, packet: Packet) -> None:
        now = self.sim.now
        dst = packet.final_dst
        if node == dst:
            self.metrics.delivered(now, packet, node)
            return
        if packet.ttl <= 0:
            self.metrics.dropped(now, packet, node, DropReason.TTL_EXHAUSTED)
            return
        is_source = node == packet.origin
        entry = self.route_lookup(node, dst)
        if entry is not None:
            packet.ttl -= 1
            if self.channel.transmit(node, entry.next_hop, packet):
                return
            packet.ttl += 1  # frame never left
            entry.valid = False
            if not is_source:
                self.metrics.dropped(now, packet, node, DropReason.LINK_BREAK)
                return
        elif not is_source:
            self.metrics.dropped(now, packet, node, DropReason.NO_ROUTE)
            return
        self._buffer(node, packet)
        self._discover(node, dst)

    def _buffer(self, node: int, packet: Packet) -> None:
        buf = self.nodes[node].buffers.setdefault(packet.final_dst, deque())
        if len(buf) >= self.config.buffer:
            oldest = buf.popleft()
            self.metrics.dropped(self.sim.now, oldest, node, DropReason.BUFFER_OVERFLOW)
        buf.append(packet)

    def _discover(self, node: int, dst: int) -> None:
        st = self.nodes[node]
        now = self.sim.now
        started = st.discovering.get(dst)
        if started is not None and now - started < self.config.discovery_timeout:
            return
        st.discovering[dst] = now
        st.seq += 1
        st.rreq_id += 1
        st.seen.add((node, st.rreq_id))
        known = st.table.get(dst)
        self.discoveries += 1
        rreq = Packet(Kind.RREQ, node, dst, st.rreq_id, ttl=self.config.rreq_ttl,
                      created_at=now, rreq_id=st.rreq_id, origin_seq=st.seq,
                      dst_seq=known.dst_seq if known else 0)
        self.channel.transmit(node, BROADCAST, rreq)

    def on_rreq(self, node: int, rreq: Packet) -> None:
        st = self.nodes[node]
        key = (rreq.origin, rreq.rreq_id)
        if key in st.seen:
            return
        st.seen.add(key)
        self._install(node, rreq.origin, rreq.prev_hop, rreq.hops_taken, rreq.origin_seq)
        if node == rreq.final_dst:
            st.seq = max(st.seq, rreq.dst_seq or 0) + 1
            rrep = Packet(Kind.RREP, node, rreq.origin, rreq.uid, ttl=self.config.rreq_ttl,
                          created_at=self.sim.now, rreq_id=rreq.rreq_id,
                          dst_seq=st.seq, route_dst=node)
            self.channel.transmit(node, rreq.prev_hop, rrep)
            return
        if rreq.ttl <= 0:
            return
        self.channel.transmit(node, BROADCAST, replace(rreq, ttl=rreq.ttl - 1))

    def on_rrep(self, node: int, rrep: Packet) -> None:
        st = self.nodes[node]
        self._install(node, rrep.route_dst, rrep.prev_hop, rrep.hops_taken, rrep.dst_seq)
        if node == rrep.final_dst:
            st.discovering.pop(rrep.route_dst, None)
            buf = st.buffers.pop(rrep.route_dst, None)
            while buf:
                self.on_data_aodv(node, buf.popleft())
            return
        back = self.route_lookup(node, rrep.final_dst)
        if back is None:
            return
        self.channel.transmit(node, back.next_hop, rrep)
