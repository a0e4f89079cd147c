"""CBR traffic sources and the append-only delivery/drop log."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .engine import SimulationError, US_PER_S, format_time


class DropReason(enum.Enum):
    TTL_EXHAUSTED = "TTL_EXHAUSTED"
    NO_NEIGHBOR = "NO_NEIGHBOR"
    LINK_BREAK = "LINK_BREAK"
    NO_ROUTE = "NO_ROUTE"
    BUFFER_OVERFLOW = "BUFFER_OVERFLOW"


class RecordKind(enum.Enum):
    INJECTED = "INJECTED"
    DELIVERED = "DELIVERED"
    DROP = "DROP"


CSV_HEADER = ("bin_start,protocol,seed,injected,delivered,dropped_ttl,dropped_no_neighbor,"
              "dropped_link_break,dropped_no_route,dropped_buffer")

_REASON_ORDER = (DropReason.TTL_EXHAUSTED, DropReason.NO_NEIGHBOR, DropReason.LINK_BREAK,
                 DropReason.NO_ROUTE, DropReason.BUFFER_OVERFLOW)


@dataclass(frozen=True)
class CbrStream:
    src: int
    dst: int
    start: int
    stop: int
    rate: float
    payload_size: int = 512

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError("CBR stream needs start < stop")
        if not self.rate > 0:
            raise ValueError("CBR rate must be positive")


def cbr_injections(stream: CbrStream) -> list[int]:
    """Injection instants ``start + k/rate`` strictly below ``stop``.

    Each instant is rounded from the exact offset, so errors never accumulate.
    """
    times = []
    k = 0
    while True:
        t = stream.start + round(k * US_PER_S / stream.rate)
        if t >= stream.stop:
            return times
        times.append(t)
        k += 1


@dataclass(frozen=True, slots=True)
class Record:
    time: int
    uid: int
    kind: RecordKind
    node: int
    drop_reason: DropReason | None = None
    hops_taken: int | None = None
    delay: int | None = None

    def serialize(self) -> str:
        return ",".join((
            format_time(self.time), str(self.uid), self.kind.value, str(self.node),
            self.drop_reason.value if self.drop_reason else "",
            "" if self.hops_taken is None else str(self.hops_taken),
            "" if self.delay is None else format_time(self.delay),
        ))


class MetricsLog:
    """Append-only record list with per-uid accounting checks."""

    def __init__(self):
        self.records: list[Record] = []
        self._injected: dict[int, int] = {}
        self._terminal: dict[int, Record] = {}

    def record(self, entry: Record) -> None:
        if self.records and entry.time < self.records[-1].time:
            raise SimulationError(f"record time went backwards: {entry}")
        uid = entry.uid
        if entry.kind is RecordKind.INJECTED:
            if uid in self._injected:
                raise SimulationError(f"uid {uid} injected twice")
            self._injected[uid] = entry.time
        else:
            if uid not in self._injected:
                raise SimulationError(f"terminal record for never-injected uid {uid}")
            if uid in self._terminal:
                raise SimulationError(
                    f"uid {uid} already terminated ({self._terminal[uid].kind.value}); "
                    f"rejecting {entry.kind.value}")
            self._terminal[uid] = entry
        self.records.append(entry)

    def injected(self, t: int, uid: int, node: int) -> None:
        self.record(Record(t, uid, RecordKind.INJECTED, node))

    def delivered(self, t: int, packet, node: int) -> None:
        self.record(Record(t, packet.uid, RecordKind.DELIVERED, node, None,
                           packet.hops_taken, t - self._injected.get(packet.uid, t)))

    def dropped(self, t: int, packet, node: int, reason: DropReason) -> None:
        self.record(Record(t, packet.uid, RecordKind.DROP, node, reason, packet.hops_taken))

    def totals(self) -> dict[str, int]:
        c = Counter()
        for rec in self._terminal.values():
            c[rec.drop_reason.value if rec.drop_reason else rec.kind.value] += 1
        out = {"injected": len(self._injected), "delivered": c[RecordKind.DELIVERED.value]}
        for reason in _REASON_ORDER:
            out[reason.value] = c[reason.value]
        return out

    def unresolved(self) -> set[int]:
        return set(self._injected) - set(self._terminal)

    def serialize(self) -> str:
        return "".join(rec.serialize() + "\n" for rec in self.records)


@dataclass(frozen=True)
class BinRow:
    bin_start: int
    injected: int
    delivered: int
    dropped: dict

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())


def bin_counts(records: Iterable[Record], bin_width: int, duration: int = 0) -> list[BinRow]:
    """Reduce records into half-open bins ``[k*w, (k+1)*w)`` covering ``[0, duration]``."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    records = list(records)
    last = max([duration] + [r.time for r in records])
    nbins = last // bin_width + 1
    if duration and duration % bin_width == 0 and not any(r.time >= duration for r in records):
        nbins = duration // bin_width
    inj = [0] * nbins
    dlv = [0] * nbins
    drops = [Counter() for _ in range(nbins)]
    for rec in records:
        k = rec.time // bin_width
        if rec.kind is RecordKind.INJECTED:
            inj[k] += 1
        elif rec.kind is RecordKind.DELIVERED:
            dlv[k] += 1
        else:
            drops[k][rec.drop_reason] += 1
    return [BinRow(k * bin_width, inj[k], dlv[k], {r: drops[k][r] for r in _REASON_ORDER})
            for k in range(nbins)]


def csv_rows(rows: Iterable[BinRow], protocol: str, seed: int) -> list[str]:
    return [",".join([format_time(row.bin_start), protocol, str(seed), str(row.injected),
                      str(row.delivered)] + [str(row.dropped[r]) for r in _REASON_ORDER])
            for row in rows]
