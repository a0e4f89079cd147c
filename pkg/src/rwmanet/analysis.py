"""Expected-neighbor counts, distance CDFs, the expected-edges series and an
exact hitting-time oracle for the walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .world import Move, Position, World


class Unreachable(ValueError):
    """Destination cannot be reached from the source."""


@dataclass(frozen=True)
class StaticDeployment:
    positions: tuple[Position, ...]
    range_m: float

    @classmethod
    def of(cls, positions: Sequence[Position | tuple[float, float]], range_m: float = 250.0):
        return cls(tuple(p if isinstance(p, Position) else Position(*p) for p in positions),
                   range_m)

    @property
    def distances(self) -> np.ndarray:
        xy = np.array([(p.x, p.y) for p in self.positions], dtype=float)
        return np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])

    @property
    def adjacency(self) -> np.ndarray:
        adj = self.distances <= self.range_m
        np.fill_diagonal(adj, False)
        return adj


def expected_neighbors(dep: StaticDeployment, focal: int) -> float:
    """Neighbor count of ``focal`` in a static deployment."""
    if len(dep.positions) < 2:
        raise ValueError("expected_neighbors needs at least two nodes")
    return float(dep.adjacency[focal].sum())


def expected_neighbors_mobile(world: World, focal: int, t: int, samples: int = 1,
                              start_jitter: float = 0.0, seed: int = 0) -> float:
    """Sum over the other nodes ``j`` of P(distance(focal, j) <= r) at time ``t``."""
    if world.n < 2:
        raise ValueError("expected_neighbors needs at least two nodes")
    r = world.radio.range_m
    return float(sum(
        estimate_distance_cdf(world, focal, j, t, [r], samples, start_jitter, seed + j)[0]
        for j in world.nodes if j != focal))


def expected_walk_length_series(expected_nbrs: float, cdf_values: Sequence[float]) -> np.ndarray:
    """Partial sums of ``sum_k (1/E)^(k-1) * F_k * k`` for ``k = 1..K``.

    ``cdf_values[k-1]`` is P(distance <= k*r).  The terms are evaluated
    exactly as written; the series is not a normalized expectation and is
    divergent for ``E <= 1`` with ``F = 1``.
    """
    if not expected_nbrs > 0:
        raise ValueError("expected neighbor count must be positive")
    f = np.asarray(cdf_values, dtype=float)
    if f.ndim != 1 or f.size < 1:
        raise ValueError("need at least one CDF value")
    if np.any((f < 0) | (f > 1)):
        raise ValueError("CDF values must lie in [0, 1]")
    k = np.arange(1, f.size + 1, dtype=float)
    terms = (1.0 / expected_nbrs) ** (k - 1) * f * k
    return np.cumsum(terms)


def _transition_rows(adj: np.ndarray, dst: int, direct_delivery: bool) -> np.ndarray:
    n = adj.shape[0]
    p = np.zeros((n, n))
    for v in range(n):
        nbrs = np.flatnonzero(adj[v])
        if nbrs.size == 0:
            continue
        if direct_delivery and adj[v, dst]:
            p[v, dst] = 1.0
        else:
            p[v, nbrs] = 1.0 / nbrs.size
    return p


def _reachable(adj: np.ndarray, src: int) -> set[int]:
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(adj[v]):
            if u not in seen:
                seen.add(int(u))
                stack.append(int(u))
    return seen


def hitting_time_oracle(adjacency, src: int, dst: int, direct_delivery: bool = False) -> float:
    """Exact expected hop count of the walk from ``src`` until it first hits ``dst``.

    Solves ``h_v = 1 + sum_u P(v, u) h_u`` with ``h_dst = 0``.  With
    ``direct_delivery=False`` the walk is simple (uniform over neighbors);
    with ``True`` any node adjacent to ``dst`` steps to it deterministically,
    which is what the protocol does by default.
    """
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    if adj.shape != (n, n):
        raise ValueError("adjacency must be square")
    if src == dst:
        return 0.0
    comp = _reachable(adj, src)
    if dst not in comp:
        raise Unreachable(f"node {dst} unreachable from {src}")
    # states: the source's component minus the absorbing destination
    states = sorted(comp - {dst})
    idx = {v: i for i, v in enumerate(states)}
    p = _transition_rows(adj, dst, direct_delivery)
    q = p[np.ix_(states, states)]
    h = np.linalg.solve(np.eye(len(states)) - q, np.ones(len(states)))
    return float(h[idx[src]])


def estimate_distance_cdf(world: World, i: int, j: int, t: int, d_grid: Sequence[float],
                          samples: int = 1, start_jitter: float = 0.0,
                          seed: int = 0) -> np.ndarray:
    """P(distance(i, j) <= d) at time ``t`` for each ``d`` in ``d_grid``.

    Deterministic motion gives a 0/1 step.  With ``start_jitter > 0`` each
    node's legs are all delayed by one Uniform(0, start_jitter) seconds draw
    per node and sample, and the CDF is the fraction of ``samples`` draws.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    grid = np.asarray(d_grid, dtype=float)
    if start_jitter <= 0 or (not world.legs[i] and not world.legs[j]):
        dist = world.distance(i, j, t)
        return (dist <= grid).astype(float)
    rng = np.random.default_rng(seed)
    dists = np.empty(samples)
    for s in range(samples):
        pos = []
        for node in (i, j):
            shift = int(round(rng.uniform(0.0, start_jitter) * 1e6))
            moves = [Move(0, leg.start + shift, leg.destination, leg.speed)
                     for leg in world.legs[node]]
            w = World([world.initial[node]], moves, world.radio)
            pos.append(w.position_at(0, t))
        dists[s] = pos[0].distance(pos[1])
    return (dists[:, None] <= grid[None, :]).mean(axis=0)


def ttl_for_half_success(mean_hops: float) -> int:
    """TTL that guarantees success probability >= 1/2 by Markov's inequality."""
    return max(1, math.ceil(2 * mean_hops))
