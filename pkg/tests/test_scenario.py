import pytest
from hypothesis import given, settings, strategies as st

from rwmanet.engine import seconds
from rwmanet.scenario import (BUILTIN, ScenarioError, builtin, parse_scenario, parse_seeds,
                              serialize_scenario)
from rwmanet.world import World


def test_builtin_shape():
    cfg = builtin("paper-6node")
    assert len(cfg.nodes) == 6
    assert [m.node for m in cfg.moves] == [5]
    assert [(s.src, s.dst) for s in cfg.streams] == [(0, 5)]
    s = cfg.streams[0]
    assert (s.start, s.stop, s.rate, s.payload_size) == (seconds(1), seconds(2), 50.0, 512)
    assert cfg.duration == seconds(3)
    assert cfg.radio.hop_delay == 2_000 and cfg.radio.range_m == 250.0


def test_builtin_destination_starts_out_of_range_and_ends_adjacent():
    cfg = builtin("paper-6node")
    w = World(cfg.nodes, cfg.moves, cfg.radio)
    assert w.distance(0, 5, 0) == pytest.approx(500.0)
    assert not w.in_range(0, 5, 0)
    assert w.in_range(0, 5, seconds(2.0))
    # the destination always has at least one neighbor while it moves
    for ms in range(1000, 2001, 5):
        assert w.neighbors_of(5, ms * 1000)


def test_builtin_shortest_path_breaks_mid_window():
    cfg = builtin("paper-6node")
    w = World(cfg.nodes, cfg.moves, cfg.radio)
    assert w.in_range(4, 5, seconds(1.4))
    assert not w.in_range(4, 5, seconds(1.5))


def test_unknown_node_in_cbr():
    text = "node 0 0 0\nnode 1 10 0\ncbr src 0 dst 9 start 1 stop 2 rate 10\n"
    with pytest.raises(ScenarioError, match="line 3: unknown node 9"):
        parse_scenario(text)


def test_unknown_node_in_move():
    with pytest.raises(ScenarioError, match="unknown node 4"):
        parse_scenario("node 0 0 0\nmove 4 start 0 to 1 1 speed 1\n")


def test_no_nodes():
    with pytest.raises(ScenarioError, match="no nodes defined"):
        parse_scenario("# nothing\nduration 3\n")


def test_duplicate_node():
    with pytest.raises(ScenarioError, match="line 2: duplicate node id 0"):
        parse_scenario("node 0 0 0\nnode 0 1 1\n")


def test_node_ids_must_be_dense():
    with pytest.raises(ScenarioError, match="node ids"):
        parse_scenario("node 0 0 0\nnode 2 1 1\n")


@pytest.mark.parametrize("line", [
    "node 1 x 0",
    "range",
    "frobnicate 3",
    "randwalk max_ttl",
    "randwalk colour 3",
    "randwalk exclude_prev 2",
    "aodv buffer 0",
    "cbr src 0 dst 0 start 1 stop 2",
])
def test_syntax_errors_carry_line_numbers(line):
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario(f"node 0 0 0\n{line}\n")


def test_keys_in_any_order_and_defaults():
    cfg = parse_scenario("node 0 0 0\nnode 1 5 5\n"
                         "randwalk max_ttl 9 collect_window_ms 12.5\n"
                         "aodv buffer 3\n"
                         "cbr rate 4 dst 1 src 0 stop 2 start 1\n")
    assert (cfg.randwalk.max_ttl, cfg.randwalk.collect_window) == (9, 12_500)
    assert cfg.randwalk.direct_delivery and not cfg.randwalk.exclude_prev_hop
    assert (cfg.aodv.buffer, cfg.aodv.rreq_ttl) == (3, 16)
    assert cfg.streams[0].payload_size == 512
    assert cfg.duration == seconds(3)  # last stop + drain


def test_duration_must_exceed_traffic():
    with pytest.raises(ScenarioError, match="duration"):
        parse_scenario("duration 1.5\nnode 0 0 0\nnode 1 5 5\ncbr src 0 dst 1 start 1 stop 2 rate 4\n")


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("7,3") == [7, 3]
    with pytest.raises(ScenarioError):
        parse_seeds("4..1")
    with pytest.raises(ScenarioError):
        parse_seeds("a")


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_round_trip(name):
    cfg = builtin(name)
    text = serialize_scenario(cfg)
    assert parse_scenario(text) == cfg
    assert serialize_scenario(parse_scenario(text)) == text


@st.composite
def scenarios(draw):
    n = draw(st.integers(2, 6))
    coord = st.integers(-2000, 2000).map(lambda v: v / 4)
    lines = [f"range {draw(st.integers(1, 500))}",
             f"hop_delay_ms {draw(st.integers(1, 20))}"]
    lines += [f"node {i} {draw(coord)} {draw(coord)}" for i in range(n)]
    node = st.integers(0, n - 1)
    t_ms = st.integers(0, 5000)
    for v in draw(st.lists(node, max_size=3, unique=True)):
        lines.append(f"move {v} start {draw(t_ms) / 1000} to {draw(coord)} {draw(coord)} "
                     f"speed {draw(st.integers(1, 900))}")
    for _ in range(draw(st.integers(0, 3))):
        a = draw(t_ms)
        lines.append(f"cbr src {draw(node)} dst {draw(node)} start {a / 1000} "
                     f"stop {(a + draw(st.integers(1, 3000))) / 1000} "
                     f"rate {draw(st.integers(1, 200))} size {draw(st.integers(1, 2000))}")
    lines.append(f"randwalk collect_window_ms {draw(st.integers(1, 100))} "
                 f"max_ttl {draw(st.integers(1, 200))} exclude_prev {draw(st.sampled_from('01'))} "
                 f"direct {draw(st.sampled_from('01'))}")
    lines.append(f"aodv rreq_ttl {draw(st.integers(1, 30))} buffer {draw(st.integers(1, 100))}")
    return "\n".join(draw(st.permutations(lines))) + "\n"


@settings(max_examples=100, deadline=None)
@given(scenarios())
def test_parse_serialize_round_trip(text):
    cfg = parse_scenario(text)
    assert parse_scenario(serialize_scenario(cfg)) == cfg
