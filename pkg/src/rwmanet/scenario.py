"""Line-based scenario files.

One directive per line, ``#`` starts a comment::

    duration <seconds>
    range <meters>
    hop_delay_ms <ms>
    node <id> <x> <y>
    move <id> start <t> to <x> <y> speed <m/s>
    cbr src <id> dst <id> start <t> stop <t> rate <pkt/s> size <bytes>
    randwalk collect_window_ms <ms> max_ttl <hops> exclude_prev <0|1> [direct <0|1>]
    aodv rreq_ttl <hops> buffer <pkts> [discovery_timeout_ms <ms>] [data_ttl <hops>]
    seeds <a..b | a,b,c>

Key/value directives (``randwalk``, ``aodv``, ``cbr``) accept their keys in
any order; omitted keys keep their defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

from .aodv import AodvConfig
from .engine import US_PER_S, format_time, seconds
from .randwalk import RandWalkConfig
from .traffic import CbrStream
from .world import Move, Position, RadioModel

DRAIN = US_PER_S


class ScenarioError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    nodes: list[Position]
    moves: list[Move] = field(default_factory=list)
    streams: list[CbrStream] = field(default_factory=list)
    radio: RadioModel = field(default_factory=RadioModel)
    duration: int = 0
    randwalk: RandWalkConfig = field(default_factory=RandWalkConfig)
    aodv: AodvConfig = field(default_factory=AodvConfig)
    seeds: list[int] = field(default_factory=lambda: [1])

    def __post_init__(self):
        if not self.nodes:
            raise ScenarioError("no nodes defined")
        n = len(self.nodes)
        for mv in self.moves:
            if not 0 <= mv.node < n:
                raise ScenarioError(f"unknown node {mv.node}")
        for s in self.streams:
            for v in (s.src, s.dst):
                if not 0 <= v < n:
                    raise ScenarioError(f"unknown node {v}")
        last_stop = max((s.stop for s in self.streams), default=0)
        if not self.duration:
            self.duration = last_stop + DRAIN
        if self.duration <= last_stop:
            raise ScenarioError("duration must exceed the last traffic stop time")


def parse_seeds(text: str) -> list[int]:
    """``"1..20"`` (inclusive) or ``"1,5,9"``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise ScenarioError(f"bad seed list {text!r}") from None


def _num(tok: str, lineno: int) -> float:
    try:
        return float(Decimal(tok))
    except InvalidOperation:
        raise ScenarioError(f"line {lineno}: expected a number, got {tok!r}") from None


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ScenarioError(f"line {lineno}: expected an integer, got {tok!r}") from None


def _time(tok: str, lineno: int) -> int:
    try:
        return seconds(tok)
    except (InvalidOperation, ValueError):
        raise ScenarioError(f"line {lineno}: expected a time in seconds, got {tok!r}") from None


def _ms(tok: str, lineno: int) -> int:
    try:
        return int((Decimal(tok) * 1000).to_integral_value())
    except InvalidOperation:
        raise ScenarioError(f"line {lineno}: expected milliseconds, got {tok!r}") from None


def _flag(tok: str, lineno: int) -> bool:
    if tok not in ("0", "1"):
        raise ScenarioError(f"line {lineno}: expected 0 or 1, got {tok!r}")
    return tok == "1"


def _pairs(toks: list[str], lineno: int, allowed: set[str]) -> dict[str, str]:
    if len(toks) % 2:
        raise ScenarioError(f"line {lineno}: expected key/value pairs")
    out = {}
    for k, v in zip(toks[::2], toks[1::2]):
        if k not in allowed:
            raise ScenarioError(f"line {lineno}: unknown key {k!r}")
        if k in out:
            raise ScenarioError(f"line {lineno}: duplicate key {k!r}")
        out[k] = v
    return out


def parse_scenario(text: str) -> ScenarioConfig:
    nodes: dict[int, Position] = {}
    moves: list[tuple[int, Move]] = []
    streams: list[tuple[int, CbrStream]] = []
    range_m, hop_delay, duration = 250.0, 2_000, 0
    rw, ao = RandWalkConfig(), AodvConfig()
    seeds = [1]

    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        head, args = toks[0], toks[1:]
        try:
            if head == "duration" and len(args) == 1:
                duration = _time(args[0], lineno)
            elif head == "range" and len(args) == 1:
                range_m = _num(args[0], lineno)
            elif head == "hop_delay_ms" and len(args) == 1:
                hop_delay = _ms(args[0], lineno)
            elif head == "node" and len(args) == 3:
                nid = _int(args[0], lineno)
                if nid in nodes:
                    raise ScenarioError(f"line {lineno}: duplicate node id {nid}")
                nodes[nid] = Position(_num(args[1], lineno), _num(args[2], lineno))
            elif (head == "move" and len(args) == 8 and args[1] == "start"
                  and args[3] == "to" and args[6] == "speed"):
                moves.append((lineno, Move(_int(args[0], lineno), _time(args[2], lineno),
                                           Position(_num(args[4], lineno), _num(args[5], lineno)),
                                           _num(args[7], lineno))))
            elif head == "cbr":
                kv = _pairs(args, lineno, {"src", "dst", "start", "stop", "rate", "size"})
                missing = {"src", "dst", "start", "stop", "rate"} - kv.keys()
                if missing:
                    raise ScenarioError(f"line {lineno}: cbr missing {sorted(missing)}")
                streams.append((lineno, CbrStream(
                    _int(kv["src"], lineno), _int(kv["dst"], lineno), _time(kv["start"], lineno),
                    _time(kv["stop"], lineno), _num(kv["rate"], lineno),
                    _int(kv.get("size", "512"), lineno))))
            elif head == "randwalk":
                kv = _pairs(args, lineno, {"collect_window_ms", "max_ttl", "exclude_prev", "direct"})
                upd = {}
                if "collect_window_ms" in kv:
                    upd["collect_window"] = _ms(kv["collect_window_ms"], lineno)
                if "max_ttl" in kv:
                    upd["max_ttl"] = _int(kv["max_ttl"], lineno)
                if "exclude_prev" in kv:
                    upd["exclude_prev_hop"] = _flag(kv["exclude_prev"], lineno)
                if "direct" in kv:
                    upd["direct_delivery"] = _flag(kv["direct"], lineno)
                rw = replace(rw, **upd)
            elif head == "aodv":
                kv = _pairs(args, lineno, {"rreq_ttl", "buffer", "discovery_timeout_ms", "data_ttl"})
                upd = {}
                for key in ("rreq_ttl", "buffer", "data_ttl"):
                    if key in kv:
                        upd[key] = _int(kv[key], lineno)
                if "discovery_timeout_ms" in kv:
                    upd["discovery_timeout"] = _ms(kv["discovery_timeout_ms"], lineno)
                ao = replace(ao, **upd)
            elif head == "seeds" and len(args) == 1:
                seeds = parse_seeds(args[0])
            else:
                raise ScenarioError(f"line {lineno}: cannot parse {raw.strip()!r}")
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from None

    if not nodes:
        raise ScenarioError("no nodes defined")
    if sorted(nodes) != list(range(len(nodes))):
        raise ScenarioError(f"node ids must be 0..{len(nodes) - 1}, got {sorted(nodes)}")
    for lineno, mv in moves:
        if mv.node not in nodes:
            raise ScenarioError(f"line {lineno}: unknown node {mv.node}")
    for lineno, s in streams:
        for v in (s.src, s.dst):
            if v not in nodes:
                raise ScenarioError(f"line {lineno}: unknown node {v}")
    try:
        return ScenarioConfig(
            nodes=[nodes[i] for i in range(len(nodes))],
            moves=[m for _, m in moves], streams=[s for _, s in streams],
            radio=RadioModel(range_m, hop_delay), duration=duration,
            randwalk=rw, aodv=ao, seeds=seeds)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _fmt_ms(t: int) -> str:
    return _fmt(t / 1000) if t % 1000 else str(t // 1000)


def serialize_scenario(cfg: ScenarioConfig) -> str:
    lines = [f"duration {format_time(cfg.duration)}",
             f"range {_fmt(cfg.radio.range_m)}",
             f"hop_delay_ms {_fmt_ms(cfg.radio.hop_delay)}"]
    lines += [f"node {i} {_fmt(p.x)} {_fmt(p.y)}" for i, p in enumerate(cfg.nodes)]
    lines += [f"move {m.node} start {format_time(m.start)} to {_fmt(m.to.x)} {_fmt(m.to.y)} "
              f"speed {_fmt(m.speed)}" for m in cfg.moves]
    lines += [f"cbr src {s.src} dst {s.dst} start {format_time(s.start)} "
              f"stop {format_time(s.stop)} rate {_fmt(s.rate)} size {s.payload_size}"
              for s in cfg.streams]
    rw, ao = cfg.randwalk, cfg.aodv
    lines.append(f"randwalk collect_window_ms {_fmt_ms(rw.collect_window)} max_ttl {rw.max_ttl} "
                 f"exclude_prev {int(rw.exclude_prev_hop)} direct {int(rw.direct_delivery)}")
    lines.append(f"aodv rreq_ttl {ao.rreq_ttl} buffer {ao.buffer} "
                 f"discovery_timeout_ms {_fmt_ms(ao.discovery_timeout)} data_ttl {ao.data_ttl}")
    lines.append("seeds " + ",".join(map(str, cfg.seeds)))
    return "\n".join(lines) + "\n"


SIX_NODE = """\
# Six-node mobility scenario.
# Node 0 streams CBR to node 5 from t=1 s to t=2 s.  Node 5 starts 500 m
# away, out of range, and drives to (100,200) at 500 m/s, arriving at t=2 s.
# Nodes 1-4 are placed so that the shortest path 0-2-4-5 loses its last link
# (4-5) at about t=1.47 s, while 5 keeps some neighbor the whole way.
# Node 3 is an off-path detour between 2 and 4.
duration 3.0
range 250
hop_delay_ms 2
node 0 100 200
node 1 225 200
node 2 320 290
node 3 350 470
node 4 540 380
node 5 600 200
move 5 start 1.0 to 100 200 speed 500
cbr src 0 dst 5 start 1.0 stop 2.0 rate 50 size 512
randwalk collect_window_ms 30 max_ttl 64 exclude_prev 0
aodv rreq_ttl 16 buffer 64
"""

BUILTIN = {"paper-6node": SIX_NODE}


def builtin(name: str) -> ScenarioConfig:
    try:
        return parse_scenario(BUILTIN[name])
    except KeyError:
        raise ScenarioError(f"unknown built-in scenario {name!r}; have {sorted(BUILTIN)}") from None
