import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwmanet.analysis import (StaticDeployment, Unreachable, estimate_distance_cdf,
                              expected_neighbors, expected_neighbors_mobile,
                              expected_walk_length_series, hitting_time_oracle,
                              ttl_for_half_success)
from rwmanet.engine import seconds
from rwmanet.scenario import builtin
from rwmanet.world import Move, Position, World

from _support import EDGES, GRAPHS, RANGE, adjacency_from_edges, exact_hitting_time


def six_node_world():
    cfg = builtin("paper-6node")
    return World(cfg.nodes, cfg.moves, cfg.radio)


def test_expected_neighbors_default_layout():
    cfg = builtin("paper-6node")
    assert expected_neighbors(StaticDeployment.of(cfg.nodes, 250.0), 0) == 2.0


def test_expected_neighbors_complete_graph():
    dep = StaticDeployment.of([(10 * i, 0) for i in range(7)])
    assert expected_neighbors(dep, 3) == 6.0


def test_expected_neighbors_single_node_error():
    with pytest.raises(ValueError):
        expected_neighbors(StaticDeployment.of([(0, 0)]), 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 700), st.floats(0, 700)), min_size=2, max_size=10))
def test_expected_neighbors_equals_world_count(pts):
    dep = StaticDeployment.of(pts, RANGE)
    world = World([Position(*p) for p in pts])
    for i in range(len(pts)):
        assert expected_neighbors(dep, i) == len(world.neighbors_of(i, 0))
        assert expected_neighbors_mobile(world, i, 0) == len(world.neighbors_of(i, 0))


def test_deployment_matrices():
    dep = StaticDeployment.of(GRAPHS["grid3x2"][0], RANGE)
    d = dep.distances
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0)
    expected = adjacency_from_edges(6, EDGES["grid3x2"])
    assert dep.adjacency.tolist() == expected


def test_series_geometric_limit():
    sums = expected_walk_length_series(2.0, [1.0] * 60)
    assert abs(sums[-1] - 4.0) < 1e-6


def test_series_e1_is_triangular_and_divergent():
    sums = expected_walk_length_series(1.0, [1.0] * 50)
    assert sums.tolist() == [k * (k + 1) / 2 for k in range(1, 51)]


def test_series_first_term_is_f1():
    assert expected_walk_length_series(3.0, [0.37]).tolist() == [0.37]


def test_series_rejects_nonpositive_e():
    with pytest.raises(ValueError):
        expected_walk_length_series(0.0, [1.0])


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 50), st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_series_monotone_and_matches_term_formula(e_n, f):
    f = sorted(f)  # a CDF in k*r is nondecreasing in k
    sums = expected_walk_length_series(e_n, f)
    assert np.all(np.diff(sums) >= 0)
    direct = sum((1 / e_n) ** (k - 1) * fk * k for k, fk in enumerate(f, 1))
    assert math.isclose(sums[-1], direct, rel_tol=1e-9, abs_tol=1e-12)


def test_oracle_trivial_and_derived_values():
    assert hitting_time_oracle(adjacency_from_edges(3, EDGES["path3"]), 1, 1) == 0.0
    assert hitting_time_oracle(adjacency_from_edges(3, EDGES["path3"]), 0, 2) == pytest.approx(4.0)
    assert hitting_time_oracle(adjacency_from_edges(3, EDGES["k3"]), 0, 2) == pytest.approx(2.0)


def test_oracle_direct_delivery_values():
    assert hitting_time_oracle(adjacency_from_edges(3, EDGES["path3"]), 0, 2, True) == pytest.approx(2.0)
    assert hitting_time_oracle(adjacency_from_edges(3, EDGES["k3"]), 0, 2, True) == pytest.approx(1.0)


def test_oracle_unreachable():
    adj = adjacency_from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(Unreachable):
        hitting_time_oracle(adj, 0, 3)


def test_oracle_ignores_other_components():
    adj = adjacency_from_edges(5, [(0, 1), (1, 2), (3, 4)])
    assert hitting_time_oracle(adj, 0, 2) == pytest.approx(4.0)


@st.composite
def connected_graphs(draw):
    n = draw(st.integers(2, 8))
    edges = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]  # random tree
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    edges += [(a, b) for a, b in extra if a != b]
    src = draw(st.integers(0, n - 1))
    dst = draw(st.integers(0, n - 1))
    return adjacency_from_edges(n, edges), src, dst


@settings(max_examples=80, deadline=None)
@given(connected_graphs(), st.booleans())
def test_oracle_matches_exact_rational_solve(g, direct):
    adj, src, dst = g
    got = hitting_time_oracle(adj, src, dst, direct)
    want = exact_hitting_time(adj, src, dst, direct)
    assert got == pytest.approx(float(want), rel=1e-9)


@pytest.mark.parametrize("name", sorted(GRAPHS))
def test_oracle_on_geometric_test_graphs(name):
    pos, src, dst = GRAPHS[name]
    adj = StaticDeployment.of(pos, RANGE).adjacency
    for direct in (False, True):
        want = exact_hitting_time(adjacency_from_edges(len(pos), EDGES[name]), src, dst, direct)
        assert hitting_time_oracle(adj, src, dst, direct) == pytest.approx(float(want))


def test_grid_values_frozen():
    # exact rational values from the Fraction solver
    adj = adjacency_from_edges(6, EDGES["grid3x2"])
    assert exact_hitting_time(adj, 0, 5) == Fraction(49, 5)
    assert exact_hitting_time(adj, 0, 5, direct=True) == Fraction(31, 7)


def test_cdf_six_node_motion():
    w = six_node_world()
    assert estimate_distance_cdf(w, 0, 5, seconds(1.5), [300.0]).tolist() == [1.0]
    assert estimate_distance_cdf(w, 0, 5, seconds(1.5), [250.0]).tolist() == [1.0]
    assert estimate_distance_cdf(w, 0, 5, seconds(1.5), [249.0]).tolist() == [0.0]


def test_cdf_limits():
    w = six_node_world()
    assert estimate_distance_cdf(w, 0, 3, 0, [0.0]).tolist() == [0.0]
    assert estimate_distance_cdf(w, 0, 3, 0, [1e12]).tolist() == [1.0]


def test_cdf_jitter_against_closed_form():
    # node 1 leaves (600,0) for (0,0) at t=1+J, J~U(0,0.5), 500 m/s; at t=1.5
    # the distance to the origin is 350 + 500*J, so P(dist <= d) = (d-350)/250
    w = World([Position(0, 0), Position(600, 0)], [Move(1, seconds(1.0), Position(0, 0), 500.0)])
    grid = [300.0, 400.0, 475.0, 550.0, 600.0]
    cdf = estimate_distance_cdf(w, 0, 1, seconds(1.5), grid, samples=20_000,
                                start_jitter=0.5, seed=4)
    expected = [0.0, 0.2, 0.5, 0.8, 1.0]
    assert np.allclose(cdf, expected, atol=0.015)
    assert np.all(np.diff(cdf) >= 0)


def test_cdf_sample_count_validation():
    with pytest.raises(ValueError):
        estimate_distance_cdf(six_node_world(), 0, 5, 0, [1.0], samples=0)


def test_ttl_for_half_success():
    assert ttl_for_half_success(4.0) == 8
    assert ttl_for_half_success(4.428571) == 9
