"""Weighted networks with exact rational geometry.

Vertices and edges carry non-negative rational weights; edges carry a
positive rational length.  Points live either on a vertex or somewhere
along an edge, measured from the endpoint with the smaller id.  Offsets
are :class:`ExtendedLength` values so that a point can sit "just after"
another point by a symbolic infinitesimal amount.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

Rational = Union[Fraction, int, str]


class NetworkError(ValueError):
    """Malformed network or point reference."""


def to_fraction(value: Rational) -> Fraction:
    """Coerce ints, Fractions and ``"a/b"`` / decimal strings to a Fraction.

    Floats are rejected: every quantity on a solver path must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise NetworkError(f"cannot parse rational {value!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


class ExtendedLength(NamedTuple):
    """``real + eps * ε`` for a symbolic positive infinitesimal ``ε``.

    Tuple ordering is lexicographic, which is exactly the order obtained by
    substituting any sufficiently small positive number for ``ε``.
    """

    real: Fraction
    eps: Fraction = Fraction(0)

    def __add__(self, other):  # type: ignore[override]
        return ExtendedLength(self.real + other[0], self.eps + other[1])

    def __sub__(self, other):
        return ExtendedLength(self.real - other[0], self.eps - other[1])

    def __neg__(self):
        return ExtendedLength(-self.real, -self.eps)

    def scale(self, factor) -> "ExtendedLength":
        return ExtendedLength(self.real * factor, self.eps * factor)

    def half(self) -> "ExtendedLength":
        return ExtendedLength(Fraction(self.real) / 2, Fraction(self.eps) / 2)

    @property
    def is_finite(self) -> bool:
        return not (isinstance(self.real, float) and math.isinf(self.real))

    @classmethod
    def of(cls, real: Rational, eps: Rational = 0) -> "ExtendedLength":
        return cls(to_fraction(real), to_fraction(eps))


ZERO = ExtendedLength(Fraction(0), Fraction(0))
INFINITY = ExtendedLength(math.inf, Fraction(0))  # type: ignore[arg-type]


def ext_abs(x: ExtendedLength) -> ExtendedLength:
    return x if x >= ZERO else -x


def ext_min(a: ExtendedLength, b: ExtendedLength) -> ExtendedLength:
    return a if a <= b else b


@dataclass(frozen=True, order=True)
class Vertex:
    id: int

    def sort_key(self) -> tuple:
        return (0, self.id)


@dataclass(frozen=True, order=True)
class EdgePoint:
    edge: int
    offset: ExtendedLength

    def sort_key(self) -> tuple:
        return (1, self.edge, self.offset)


NetworkPoint = Union[Vertex, EdgePoint]


def point_key(p: NetworkPoint) -> tuple:
    """Total order over points: vertices by id, then edge points by (edge, offset)."""
    return p.sort_key()


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    length: Fraction
    weight: Fraction

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


@dataclass(frozen=True)
class WeightedNetwork:
    """Undirected network with separate edge length and edge weight.

    Edges are stored with ``u < v``.  Instances are treated as immutable.
    """

    weights: Mapping[int, Fraction]
    edges: Mapping[int, Edge]
    coords: Mapping[int, Tuple[float, float]] = field(default_factory=dict)
    adjacency: Mapping[int, Tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: Dict[int, List[int]] = {v: [] for v in self.weights}
        for eid in sorted(self.edges):
            e = self.edges[eid]
            if e.u == e.v:
                raise NetworkError(f"edge {eid} is a self-loop")
            if e.u not in adj or e.v not in adj:
                raise NetworkError(f"edge {eid} references a missing vertex")
            if e.u > e.v:
                raise NetworkError(f"edge {eid} not stored in canonical orientation")
            if e.length <= 0:
                raise NetworkError(f"edge {eid} must have positive length")
            if e.weight < 0:
                raise NetworkError(f"edge {eid} has negative weight")
            adj[e.u].append(eid)
            adj[e.v].append(eid)
        for v, w in self.weights.items():
            if w < 0:
                raise NetworkError(f"vertex {v} has negative weight")
        object.__setattr__(self, "adjacency", {v: tuple(es) for v, es in adj.items()})

    @classmethod
    def build(
        cls,
        vertices: Iterable[Tuple],
        edges: Iterable[Tuple],
    ) -> "WeightedNetwork":
        """Build from ``(id, weight[, x, y])`` and ``(id, u, v, length, weight)`` tuples."""
        weights: Dict[int, Fraction] = {}
        coords: Dict[int, Tuple[float, float]] = {}
        for item in vertices:
            vid, w = int(item[0]), to_fraction(item[1])
            if vid in weights:
                raise NetworkError(f"duplicate vertex id {vid}")
            weights[vid] = w
            if len(item) >= 4 and item[2] is not None:
                coords[vid] = (float(item[2]), float(item[3]))
        edge_map: Dict[int, Edge] = {}
        for eid, u, v, length, w in edges:
            eid, u, v = int(eid), int(u), int(v)
            if eid in edge_map:
                raise NetworkError(f"duplicate edge id {eid}")
            if u > v:
                u, v = v, u
            edge_map[eid] = Edge(eid, u, v, to_fraction(length), to_fraction(w))
        return cls(weights, edge_map, coords)

    @property
    def vertex_ids(self) -> List[int]:
        return sorted(self.weights)

    @property
    def edge_ids(self) -> List[int]:
        return sorted(self.edges)

    def neighbors(self, v: int) -> List[Tuple[int, Edge]]:
        return [(self.edges[e].other(v), self.edges[e]) for e in self.adjacency[v]]

    def is_connected(self) -> bool:
        if not self.weights:
            return True
        start = min(self.weights)
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y, _ in self.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.weights)

    def is_tree(self) -> bool:
        return len(self.edges) == len(self.weights) - 1 and self.is_connected()


def total_weight(net: WeightedNetwork) -> Fraction:
    return sum(net.weights.values(), Fraction(0)) + sum(
        (e.weight for e in net.edges.values()), Fraction(0)
    )


# --------------------------------------------------------------------------
# points


def make_point(net: WeightedNetwork, edge: int, offset) -> NetworkPoint:
    """Canonical point at ``offset`` along ``edge`` (a Vertex when it lands on one)."""
    if edge not in net.edges:
        raise NetworkError(f"unknown edge {edge}")
    if not isinstance(offset, ExtendedLength):
        offset = ExtendedLength(to_fraction(offset), Fraction(0))
    e = net.edges[edge]
    if offset == (e.length, 0):
        return Vertex(e.v)
    if offset == ZERO:
        return Vertex(e.u)
    p = EdgePoint(edge, ExtendedLength(Fraction(offset.real), Fraction(offset.eps)))
    validate_point(net, p)
    return p


def validate_point(net: WeightedNetwork, p: NetworkPoint) -> None:
    if isinstance(p, Vertex):
        if p.id not in net.weights:
            raise NetworkError(f"unknown vertex {p.id}")
        return
    if not isinstance(p, EdgePoint):
        raise NetworkError(f"not a network point: {p!r}")
    if p.edge not in net.edges:
        raise NetworkError(f"unknown edge {p.edge}")
    length = net.edges[p.edge].length
    if not (ZERO < p.offset < (length, 0)):
        raise NetworkError(f"offset {p.offset} outside edge {p.edge}")


def point_sources(net: WeightedNetwork, p: NetworkPoint) -> List[Tuple[int, ExtendedLength]]:
    """Vertices reachable from ``p`` without crossing another vertex, with leg lengths."""
    if isinstance(p, Vertex):
        return [(p.id, ZERO)]
    e = net.edges[p.edge]
    return [(e.u, p.offset), (e.v, ExtendedLength(e.length, Fraction(0)) - p.offset)]


def dijkstra(
    net: WeightedNetwork, sources: Sequence[Tuple[int, ExtendedLength]]
) -> Dict[int, ExtendedLength]:
    """Multi-source shortest distances to every reachable vertex."""
    dist: Dict[int, ExtendedLength] = {}
    heap = [(d, v) for v, d in sources]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for y, e in net.neighbors(v):
            if y not in dist:
                heapq.heappush(heap, (d + (e.length, 0), y))
    return dist


def distances_from(net: WeightedNetwork, p: NetworkPoint) -> Dict[int, ExtendedLength]:
    validate_point(net, p)
    return dijkstra(net, point_sources(net, p))


def distance_to_point(
    net: WeightedNetwork,
    vertex_dist: Mapping[int, ExtendedLength],
    q: NetworkPoint,
    origin: Optional[NetworkPoint] = None,
) -> ExtendedLength:
    """Distance to ``q`` given vertex distances from some origin point."""
    best = INFINITY
    for v, leg in point_sources(net, q):
        if v in vertex_dist:
            best = ext_min(best, vertex_dist[v] + leg)
    if (
        origin is not None
        and isinstance(origin, EdgePoint)
        and isinstance(q, EdgePoint)
        and origin.edge == q.edge
    ):
        best = ext_min(best, ext_abs(origin.offset - q.offset))
    return best


def distance(net: WeightedNetwork, p: NetworkPoint, q: NetworkPoint) -> ExtendedLength:
    """Exact shortest-path distance between two points of ``net``."""
    validate_point(net, q)
    if p == q:
        return ZERO
    return distance_to_point(net, distances_from(net, p), q, origin=p)


# --------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitMap:
    """Correspondence between a network and its refinement by split points.

    ``vertex_origin`` maps every refined vertex to a point of the original
    network; ``arc_origin`` maps every refined edge id to
    ``(original edge, offset at arc.u, offset at arc.v)``.
    """

    original: WeightedNetwork
    refined: WeightedNetwork
    vertex_origin: Mapping[int, NetworkPoint]
    arc_origin: Mapping[int, Tuple[int, Fraction, Fraction]]
    breakpoints: Mapping[int, Tuple[Tuple[Fraction, int], ...]]

    def lift(self, p: NetworkPoint) -> NetworkPoint:
        """Refined point -> original point."""
        if isinstance(p, Vertex):
            return self.vertex_origin[p.id]
        orig_edge, off_u, off_v = self.arc_origin[p.edge]
        if off_u < off_v:
            off = ExtendedLength(off_u, Fraction(0)) + p.offset
        else:
            off = ExtendedLength(off_u, Fraction(0)) - p.offset
        return make_point(self.original, orig_edge, off)

    def push(self, p: NetworkPoint) -> NetworkPoint:
        """Original point -> refined point."""
        validate_point(self.original, p)
        if isinstance(p, Vertex):
            return p
        if p.edge not in self.breakpoints:
            return p
        marks = self.breakpoints[p.edge]
        for (lo, lo_v), (hi, hi_v) in zip(marks, marks[1:]):
            if p.offset == (hi, 0):
                return Vertex(hi_v)
            if (lo, 0) < p.offset < (hi, 0):
                arc = self._arc_between(lo_v, hi_v)
                e = self.refined.edges[arc]
                inner = p.offset - (lo, 0)
                if e.u == lo_v:
                    return make_point(self.refined, arc, inner)
                return make_point(self.refined, arc, ExtendedLength(e.length, Fraction(0)) - inner)
        raise NetworkError(f"cannot locate {p} in refinement")

    def _arc_between(self, a: int, b: int) -> int:
        for eid in self.refined.adjacency[a]:
            if self.refined.edges[eid].other(a) == b:
                return eid
        raise NetworkError(f"no arc between {a} and {b}")

    def new_vertex(self, p: NetworkPoint) -> int:
        """Refined vertex id of an original point that was used as a split point."""
        q = self.push(p)
        if not isinstance(q, Vertex):
            raise NetworkError(f"{p} is not a vertex of the refinement")
        return q.id


def split_at_points(
    net: WeightedNetwork, pts: Iterable[NetworkPoint]
) -> Tuple[WeightedNetwork, SplitMap]:
    """Turn real-offset edge points into weight-0 vertices.

    Split edges are replaced by arcs with fresh ids; each arc receives the
    share of the edge weight proportional to its length.
    """
    cuts: Dict[int, set] = {}
    for p in pts:
        validate_point(net, p)
        if isinstance(p, Vertex):
            continue
        if p.offset.eps != 0:
            raise NetworkError("only real-offset points can become vertices")
        cuts.setdefault(p.edge, set()).add(Fraction(p.offset.real))

    weights = dict(net.weights)
    vertex_origin: Dict[int, NetworkPoint] = {v: Vertex(v) for v in net.weights}
    next_vid = max(net.weights, default=-1) + 1
    next_eid = max(net.edges, default=-1) + 1
    new_edges: Dict[int, Edge] = {}
    arc_origin: Dict[int, Tuple[int, Fraction, Fraction]] = {}
    breakpoints: Dict[int, Tuple[Tuple[Fraction, int], ...]] = {}

    for eid in sorted(net.edges):
        e = net.edges[eid]
        if eid not in cuts:
            new_edges[eid] = e
            arc_origin[eid] = (eid, Fraction(0), e.length)
            continue
        marks: List[Tuple[Fraction, int]] = [(Fraction(0), e.u)]
        for off in sorted(cuts[eid]):
            weights[next_vid] = Fraction(0)
            vertex_origin[next_vid] = EdgePoint(eid, ExtendedLength(off, Fraction(0)))
            marks.append((off, next_vid))
            next_vid += 1
        marks.append((e.length, e.v))
        breakpoints[eid] = tuple(marks)
        for (lo, a), (hi, b) in zip(marks, marks[1:]):
            seg = hi - lo
            w = e.weight * seg / e.length
            if a < b:
                new_edges[next_eid] = Edge(next_eid, a, b, seg, w)
                arc_origin[next_eid] = (eid, lo, hi)
            else:
                new_edges[next_eid] = Edge(next_eid, b, a, seg, w)
                arc_origin[next_eid] = (eid, hi, lo)
            next_eid += 1

    refined = WeightedNetwork(weights, new_edges, dict(net.coords))
    return refined, SplitMap(net, refined, vertex_origin, arc_origin, breakpoints)


# --------------------------------------------------------------------------
# cutting a network at points


@dataclass(frozen=True)
class Piece:
    """A component left after removing cut vertices; cut vertices are not members."""

    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    boundary: Tuple[int, ...]


def cut_at_points(
    net: WeightedNetwork, pts: Sequence[NetworkPoint]
) -> Tuple[SplitMap, Tuple[int, ...], List[Piece]]:
    """Refine ``net`` at ``pts`` and list the pieces obtained by removing them."""
    refined, smap = split_at_points(net, pts)
    cut = tuple(sorted({smap.new_vertex(p) for p in pts}))
    cut_set = set(cut)
    parent = {eid: eid for eid in refined.edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in refined.vertex_ids:
        if v in cut_set:
            continue
        es = refined.adjacency[v]
        for other in es[1:]:
            ra, rb = find(es[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: Dict[int, List[int]] = {}
    for eid in refined.edge_ids:
        groups.setdefault(find(eid), []).append(eid)
    pieces = []
    for eids in groups.values():
        verts = set()
        for eid in eids:
            e = refined.edges[eid]
            verts.update((e.u, e.v))
        pieces.append(
            Piece(
                tuple(sorted(verts - cut_set)),
                tuple(sorted(eids)),
                tuple(sorted(verts & cut_set)),
            )
        )
    for v in refined.vertex_ids:
        if v not in cut_set and not refined.adjacency[v]:
            pieces.append(Piece((v,), (), ()))
    pieces.sort(key=lambda pc: (min(pc.edges, default=math.inf), pc.vertices))
    return smap, cut, pieces


def subnetwork(
    net: WeightedNetwork, edge_ids: Iterable[int], extra_vertices: Iterable[int] = (), zeroed: Iterable[int] = ()
) -> WeightedNetwork:
    """Induced network on the given edges; vertices in ``zeroed`` get weight 0."""
    zeroed = set(zeroed)
    edges = {eid: net.edges[eid] for eid in edge_ids}
    verts = set(extra_vertices)
    for e in edges.values():
        verts.update((e.u, e.v))
    weights = {v: (Fraction(0) if v in zeroed else net.weights[v]) for v in sorted(verts)}
    coords = {v: net.coords[v] for v in verts if v in net.coords}
    return WeightedNetwork(weights, edges, coords)


# --------------------------------------------------------------------------
# JSON


def network_to_json(net: WeightedNetwork) -> dict:
    verts = []
    for v in net.vertex_ids:
        item = {"id": v, "weight": format_fraction(net.weights[v])}
        if v in net.coords:
            item["x"], item["y"] = net.coords[v]
        verts.append(item)
    edges = [
        {
            "id": e.id,
            "u": e.u,
            "v": e.v,
            "length": format_fraction(e.length),
            "weight": format_fraction(e.weight),
        }
        for e in (net.edges[i] for i in net.edge_ids)
    ]
    return {"vertices": verts, "edges": edges}


def network_from_json(doc: Mapping) -> WeightedNetwork:
    try:
        vertices = [(v["id"], str(v["weight"]), v.get("x"), v.get("y")) for v in doc["vertices"]]
        edges = [(e["id"], e["u"], e["v"], str(e["length"]), str(e["weight"])) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network document: {exc}") from exc
    return WeightedNetwork.build(vertices, edges)


def _eps_to_json(eps: Fraction):
    eps = Fraction(eps)
    return eps.numerator if eps.denominator == 1 else format_fraction(eps)


def point_to_json(p: NetworkPoint) -> dict:
    if isinstance(p, Vertex):
        return {"vertex": p.id}
    return {"edge": p.edge, "offset": format_fraction(p.offset.real), "eps": _eps_to_json(p.offset.eps)}


def point_from_json(net: WeightedNetwork, doc: Mapping) -> NetworkPoint:
    try:
        if "vertex" in doc:
            p: NetworkPoint = Vertex(int(doc["vertex"]))
            validate_point(net, p)
            return p
        off = ExtendedLength(to_fraction(str(doc["offset"])), to_fraction(str(doc.get("eps", 0))))
        return make_point(net, int(doc["edge"]), off)
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed point document: {doc!r}") from exc
