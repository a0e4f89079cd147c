"""Build and run one simulation per (protocol, seed)."""

from __future__ import annotations

from typing import Iterable

from .aodv import AodvRouting
from .engine import (WORLD, Event, MotionUpdate, PacketArrival, SimulationError, Simulator,
                     TimerExpiry, TrafficInjection, seconds)
from .randwalk import RandomWalkRouting
from .scenario import ScenarioConfig
from .traffic import (CSV_HEADER, BinRow, MetricsLog, RecordKind, bin_counts, cbr_injections,
                      csv_rows)
from .world import Channel, Kind, Packet, World

PROTOCOLS = ("randwalk", "aodv")


class Simulation:
    def __init__(self, cfg: ScenarioConfig, protocol: str, seed: int, trace: bool = False):
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
        self.cfg = cfg
        self.protocol_name = protocol
        self.seed = seed
        self.sim = Simulator(seed)
        self.world = World(cfg.nodes, cfg.moves, cfg.radio)
        self.channel = Channel(self.world, self.sim)
        self.metrics = MetricsLog()
        if protocol == "randwalk":
            self.proto = RandomWalkRouting(self.sim, self.channel, self.metrics, cfg.randwalk,
                                           trace=trace)
        else:
            self.proto = AodvRouting(self.sim, self.channel, self.metrics, cfg.aodv)
        self.destinations: dict[int, int] = {}
        self.arrivals = 0
        self._next_uid = 0
        self._schedules = [cbr_injections(s) for s in self.cfg.streams]
        self._cursor = [0] * len(self._schedules)

        self.sim.default_handler = self._on_node_event
        self.sim.handlers[WORLD] = self._on_world_event
        for sid, times in enumerate(self._schedules):
            if times:
                self.sim.schedule(times[0], self.cfg.streams[sid].src, TrafficInjection(sid))
        for t, node in self.world.arrival_times():
            self.sim.schedule(t, WORLD, MotionUpdate(node))

    def _on_world_event(self, ev: Event) -> None:
        if isinstance(ev.payload, MotionUpdate):
            self.arrivals += 1
        else:
            raise SimulationError(f"unexpected world event {ev!r}")

    def _on_node_event(self, ev: Event) -> None:
        payload = ev.payload
        node = ev.target
        if type(payload) is PacketArrival:
            self.proto.receive(node, payload.packet)
        elif type(payload) is TimerExpiry:
            self.proto.on_timer(node, payload)
        elif type(payload) is TrafficInjection:
            self._inject(payload.stream_id)
        else:
            raise SimulationError(f"unexpected node event {ev!r}")

    def _inject(self, sid: int) -> None:
        stream = self.cfg.streams[sid]
        now = self.sim.now
        uid = self._next_uid
        self._next_uid += 1
        self.destinations[uid] = stream.dst
        self.metrics.injected(now, uid, stream.src)
        packet = Packet(Kind.DATA, stream.src, stream.dst, uid, ttl=self.proto.initial_ttl,
                        payload_size=stream.payload_size, created_at=now)
        self._cursor[sid] += 1
        times = self._schedules[sid]
        if self._cursor[sid] < len(times):
            self.sim.schedule(times[self._cursor[sid]], stream.src, TrafficInjection(sid))
        self.proto.originate(stream.src, packet)

    def run(self) -> "RunResult":
        self.sim.run_until(self.cfg.duration)
        return RunResult(self)

    def data_in_flight(self) -> int:
        """DATA packets still held by a protocol or travelling on a link."""
        on_air = sum(1 for ev in self.sim.pending_events()
                     if type(ev.payload) is PacketArrival and ev.payload.packet.kind is Kind.DATA)
        return self.proto.held_packets() + on_air


class RunResult:
    def __init__(self, simulation: Simulation):
        self.simulation = simulation
        self.protocol = simulation.protocol_name
        self.seed = simulation.seed
        self.metrics = simulation.metrics
        self.duration = simulation.cfg.duration
        self.totals = self.metrics.totals()
        self.in_flight = simulation.data_in_flight()

    @property
    def dropped(self) -> int:
        t = self.totals
        return sum(v for k, v in t.items() if k not in ("injected", "delivered"))

    @property
    def conserved(self) -> bool:
        return self.totals["injected"] == self.totals["delivered"] + self.dropped + self.in_flight

    def misdelivered(self) -> int:
        """Deliveries recorded at a node other than the packet's destination."""
        dst = self.simulation.destinations
        return sum(1 for r in self.metrics.records
                   if r.kind is RecordKind.DELIVERED and r.node != dst[r.uid])

    def bins(self, bin_width: int) -> list[BinRow]:
        return bin_counts(self.metrics.records, bin_width, self.duration)

    def csv_rows(self, bin_width: int) -> list[str]:
        return csv_rows(self.bins(bin_width), self.protocol, self.seed)

    def summary(self) -> str:
        t = self.totals
        drops = " ".join(f"{k.lower()}={v}" for k, v in t.items()
                         if k not in ("injected", "delivered"))
        return (f"protocol={self.protocol} seed={self.seed} injected={t['injected']} "
                f"delivered={t['delivered']} {drops} in_flight={self.in_flight} "
                f"conserved={'yes' if self.conserved else 'NO'}")


def simulate(cfg: ScenarioConfig, protocol: str, seed: int, trace: bool = False) -> RunResult:
    try:
        return Simulation(cfg, protocol, seed, trace=trace).run()
    except SimulationError as exc:
        raise SimulationError(f"{protocol} seed {seed}: {exc}") from exc


def run(cfg: ScenarioConfig, protocols: Iterable[str], seeds: Iterable[int],
        bin_width: int = seconds(0.25)) -> tuple[str, list[RunResult]]:
    """Run every (protocol, seed) pair; return the CSV text and the results."""
    results = [simulate(cfg, p, s) for p in protocols for s in seeds]
    lines = [CSV_HEADER]
    for res in results:
        lines.extend(res.csv_rows(bin_width))
    return "\n".join(lines) + "\n", results
