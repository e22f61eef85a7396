"""Dominating Set as a payoff-threshold decision for P2.

Every vertex of a graph G gets a pendant vertex holding a P1 facility.  All
vertices weigh 1 and every edge has length and weight ``w_e`` small enough
that the edges together weigh less than one vertex.  P2 can then reach
payoff ``|V|`` with ``k`` facilities iff G has a dominating set of size ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, NamedTuple, Sequence, Set, Tuple

from .network import (
    EdgePoint,
    NetworkPoint,
    Vertex,
    WeightedNetwork,
    network_to_json,
    point_to_json,
    format_fraction,
    to_fraction,
)
from .zones import Placement, compute_zones

BRUTE_FORCE_LIMIT = 20


class SimpleGraph(NamedTuple):
    """Undirected graph on vertices ``0..n-1``."""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    @classmethod
    def of(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "SimpleGraph":
        seen = set()
        out = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            out.append(key)
        return cls(n, tuple(out))

    def closed_neighbourhood(self, v: int) -> Set[int]:
        out = {v}
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out


def parse_edge_list(text: str) -> SimpleGraph:
    """First non-comment line is the vertex count, then one ``u v`` pair per line."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty edge list")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return SimpleGraph.of(n, edges)


@dataclass(frozen=True)
class DecisionInstance:
    net: WeightedNetwork
    F: Tuple[NetworkPoint, ...]
    k: int
    delta: Fraction
    graph: SimpleGraph
    w_e: Fraction

    def to_json(self) -> dict:
        return {
            "network": network_to_json(self.net),
            "p1": [point_to_json(f) for f in self.F],
            "k": self.k,
            "delta": format_fraction(self.delta),
            "graph": {"n": self.graph.n, "edges": [list(e) for e in self.graph.edges]},
            "w_e": format_fraction(self.w_e),
        }


class NoExtraction(ValueError):
    """The placement does not reach the payoff threshold."""


def reduce_dominating_set(G: SimpleGraph, k: int) -> DecisionInstance:
    n = G.n
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in 0..{n}")
    w_e = Fraction(1, n + len(G.edges) + k + 1)
    vertices = [(v, 1) for v in range(2 * n)]
    edges = [(i, u, v, w_e, w_e) for i, (u, v) in enumerate(G.edges)]
    base = len(G.edges)
    edges += [(base + i, i, n + i, w_e, w_e) for i in range(n)]
    net = WeightedNetwork.build(vertices, edges)
    F = tuple(Vertex(n + i) for i in range(n))
    return DecisionInstance(net, F, k, Fraction(n), G, w_e)


def is_dominating_set(G: SimpleGraph, D: Iterable[int]) -> bool:
    covered = set()
    for v in D:
        covered |= G.closed_neighbourhood(v)
    return covered >= set(range(G.n))


def _target(inst: DecisionInstance, p: NetworkPoint) -> int:
    n = inst.graph.n
    if isinstance(p, Vertex):
        if p.id >= n:
            raise ValueError(f"{p} is a P1 facility")
        return p.id
    e = inst.net.edges[p.edge]
    if e.v >= n:  # pendant edge (v_i, f_i)
        return e.u
    # inside an edge of G: only its two endpoints are reachable in time
    return e.u


def extract_dominating_set(inst: DecisionInstance, S: Sequence[NetworkPoint]) -> List[int]:
    """Rewrite a placement reaching the threshold into a dominating set of G."""
    q2 = compute_zones(inst.net, Placement(inst.F, tuple(S))).q2 if S else Fraction(0)
    if q2 < inst.delta:
        raise NoExtraction(f"payoff {q2} is below the threshold {inst.delta}")
    used: Set[int] = set()
    for p in S:
        t = _target(inst, p)
        if t in used:
            t = min(v for v in range(inst.graph.n) if v not in used)
        used.add(t)
    D = sorted(used)
    if not is_dominating_set(inst.graph, D):
        raise RuntimeError(f"extracted set {D} does not dominate")
    return D


def brute_force_dominating_set(G: SimpleGraph, k: int) -> bool:
    if G.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices")
    size = min(k, G.n)
    if size < 0:
        return False
    return any(is_dominating_set(G, D) for D in combinations(range(G.n), size))


def scale_weights(inst: DecisionInstance, factor) -> DecisionInstance:
    """Multiply every vertex and edge weight and the threshold; lengths stay put."""
    factor = to_fraction(factor)
    if factor <= 0:
        raise ValueError("factor must be positive")
    net = inst.net
    weights = {v: w * factor for v, w in net.weights.items()}
    edges = {eid: e._replace(weight=e.weight * factor) for eid, e in net.edges.items()}
    return replace(inst, net=WeightedNetwork(weights, edges, dict(net.coords)), delta=inst.delta * factor)
