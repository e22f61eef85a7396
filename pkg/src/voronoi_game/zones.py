"""Service zones, payoffs, bisectors and the finite candidate set for P2.

Ownership is decided exactly.  Every facility point is inserted as a node
of an arrangement of the network; along each resulting segment a
facility's distance is ``min(a + t, b + len - t)``, so ownership can only
change where two such linear pieces cross.  Those crossings are computed
in :class:`ExtendedLength` arithmetic, and each open interval between
consecutive crossings is decided at its midpoint.

Ties between the two players go to P2; ties inside one player go to the
facility with the smaller index.  Reported payoffs keep only the real
part, so infinitesimal segments weigh nothing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .network import (
    INFINITY,
    ZERO,
    EdgePoint,
    ExtendedLength,
    NetworkError,
    NetworkPoint,
    SplitMap,
    Vertex,
    WeightedNetwork,
    dijkstra,
    distance,
    ext_min,
    format_fraction,
    make_point,
    point_key,
    point_to_json,
    split_at_points,
    total_weight,
    validate_point,
)

P1, P2 = "P1", "P2"

Node = Tuple[str, int]


class PlacementError(ValueError):
    """Invalid facility placement (e.g. P1 and P2 share a point)."""


class NotShiftable(ValueError):
    """The facility sits on a vertex and has no edge to slide along."""


@dataclass(frozen=True)
class Placement:
    F: Tuple[NetworkPoint, ...]
    S: Tuple[NetworkPoint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(self.F))
        object.__setattr__(self, "S", tuple(self.S))

    def facilities(self) -> List[Tuple[str, int, NetworkPoint]]:
        return [(P1, i, p) for i, p in enumerate(self.F)] + [(P2, j, p) for j, p in enumerate(self.S)]


@dataclass
class FacilityZone:
    player: str
    index: int
    point: NetworkPoint
    vertices: List[int] = field(default_factory=list)
    edges: List[int] = field(default_factory=list)
    segments: List[Tuple[int, ExtendedLength, ExtendedLength]] = field(default_factory=list)
    weight: Fraction = Fraction(0)


@dataclass
class ZoneReport:
    zones: List[FacilityZone]
    q1: Fraction
    q2: Fraction
    vertex_owner: Dict[int, Tuple[str, int]]
    edge_intervals: Dict[int, List[Tuple[ExtendedLength, ExtendedLength, Tuple[str, int]]]]

    def zone(self, player: str, index: int) -> FacilityZone:
        for z in self.zones:
            if z.player == player and z.index == index:
                return z
        raise KeyError((player, index))

    def player_vertices(self, player: str) -> List[int]:
        return sorted(v for v, (pl, _) in self.vertex_owner.items() if pl == player)

    def player_edges(self, player: str) -> List[int]:
        return sorted(e for z in self.zones if z.player == player for e in z.edges)

    def player_segments(self, player: str) -> List[Tuple[int, ExtendedLength, ExtendedLength]]:
        return sorted(s for z in self.zones if z.player == player for s in z.segments)


# --------------------------------------------------------------------------
# arrangement


def _rank(player: str, index: int) -> Tuple[int, int]:
    return (0 if player == P2 else 1, index)


class _Arrangement:
    """Network refined (symbolically) at facility points, with per-facility distances."""

    def __init__(self, net: WeightedNetwork, facilities: Sequence[Tuple[str, int, NetworkPoint]]):
        self.net = net
        self.facilities = list(facilities)
        self.node_of: List[Node] = []
        on_edge: Dict[int, List[Tuple[ExtendedLength, Node]]] = {}
        seen: Dict[NetworkPoint, int] = {}
        for k, (_, _, p) in enumerate(self.facilities):
            validate_point(net, p)
            if p in seen:
                raise PlacementError(f"two facilities share the point {p}")
            seen[p] = k
            if isinstance(p, Vertex):
                self.node_of.append(("v", p.id))
            else:
                node = ("f", k)
                self.node_of.append(node)
                on_edge.setdefault(p.edge, []).append((p.offset, node))

        self.adj: Dict[Node, List[Tuple[Node, ExtendedLength]]] = {("v", v): [] for v in net.weights}
        self.segments: Dict[int, List[Tuple[ExtendedLength, Node, ExtendedLength, Node]]] = {}
        for eid in net.edge_ids:
            e = net.edges[eid]
            marks = [(ZERO, ("v", e.u))] + sorted(on_edge.get(eid, [])) + [
                (ExtendedLength(e.length, Fraction(0)), ("v", e.v))
            ]
            segs = []
            for (o0, n0), (o1, n1) in zip(marks, marks[1:]):
                self.adj.setdefault(n0, [])
                self.adj.setdefault(n1, [])
                lam = o1 - o0
                self.adj[n0].append((n1, lam))
                self.adj[n1].append((n0, lam))
                segs.append((o0, n0, o1, n1))
            self.segments[eid] = segs

        self.dist: List[Dict[Node, ExtendedLength]] = [self._dijkstra(n) for n in self.node_of]
        self.rank = [_rank(pl, i) for pl, i, _ in self.facilities]

    def _dijkstra(self, src: Node) -> Dict[Node, ExtendedLength]:
        dist: Dict[Node, ExtendedLength] = {}
        heap = [(ZERO, src)]
        while heap:
            d, x = heapq.heappop(heap)
            if x in dist:
                continue
            dist[x] = d
            for y, lam in self.adj[x]:
                if y not in dist:
                    heapq.heappush(heap, (d + lam, y))
        return dist

    def node_owner(self, node: Node) -> int:
        best = None
        for k in range(len(self.facilities)):
            d = self.dist[k].get(node, INFINITY)
            if d == INFINITY:
                continue
            key = (d, self.rank[k])
            if best is None or key < best[0]:
                best = (key, k)
        if best is None:
            raise NetworkError(f"{node} is not reachable from any facility")
        return best[1]

    def segment_intervals(
        self, n0: Node, n1: Node, lam: ExtendedLength
    ) -> List[Tuple[ExtendedLength, ExtendedLength, int]]:
        """Owner intervals ``(t0, t1, facility)`` covering ``[0, lam]`` of one segment."""
        ends = []
        for k in range(len(self.facilities)):
            a = self.dist[k].get(n0, INFINITY)
            b = self.dist[k].get(n1, INFINITY)
            ends.append((a, b))
        cuts = {ZERO, lam}
        for a, _ in ends:
            if a == INFINITY:
                continue
            for _, b in ends:
                if b == INFINITY:
                    continue
                t = (b + lam - a).half()
                if ZERO < t < lam:
                    cuts.add(t)
        cuts = sorted(cuts)
        out: List[Tuple[ExtendedLength, ExtendedLength, int]] = []
        for t0, t1 in zip(cuts, cuts[1:]):
            mid = (t0 + t1).half()
            best = None
            for k, (a, b) in enumerate(ends):
                d = ext_min(a + mid if a != INFINITY else INFINITY, b + lam - mid if b != INFINITY else INFINITY)
                if d == INFINITY:
                    continue
                key = (d, self.rank[k])
                if best is None or key < best[0]:
                    best = (key, k)
            if best is None:
                raise NetworkError("segment not reachable from any facility")
            owner = best[1]
            if out and out[-1][2] == owner:
                out[-1] = (out[-1][0], t1, owner)
            else:
                out.append((t0, t1, owner))
        return out

    def edge_intervals(self, eid: int) -> List[Tuple[ExtendedLength, ExtendedLength, int]]:
        """Owner intervals along a whole edge, in edge offsets, merged."""
        out: List[Tuple[ExtendedLength, ExtendedLength, int]] = []
        for o0, n0, o1, n1 in self.segments[eid]:
            for t0, t1, k in self.segment_intervals(n0, n1, o1 - o0):
                lo, hi = o0 + t0, o0 + t1
                if out and out[-1][2] == k and out[-1][1] == lo:
                    out[-1] = (out[-1][0], hi, k)
                else:
                    out.append((lo, hi, k))
        return out


# --------------------------------------------------------------------------
# zones and payoffs


def compute_zones(net: WeightedNetwork, placement: Placement) -> ZoneReport:
    """Service zone of every facility and the payoffs ``Q1``, ``Q2``."""
    facs = placement.facilities()
    f_points = set(placement.F)
    for p in placement.S:
        if p in f_points:
            raise PlacementError(f"P2 facility {p} coincides with a P1 facility")
    arr = _Arrangement(net, facs)
    zones = [FacilityZone(pl, i, p) for pl, i, p in facs]

    vertex_owner: Dict[int, Tuple[str, int]] = {}
    for v in net.vertex_ids:
        k = arr.node_owner(("v", v))
        zones[k].vertices.append(v)
        zones[k].weight += net.weights[v]
        vertex_owner[v] = (zones[k].player, zones[k].index)

    edge_intervals = {}
    for eid in net.edge_ids:
        e = net.edges[eid]
        density = e.weight / e.length
        intervals = arr.edge_intervals(eid)
        edge_intervals[eid] = [(lo, hi, (zones[k].player, zones[k].index)) for lo, hi, k in intervals]
        positive = [(lo, hi, k) for lo, hi, k in intervals if hi.real > lo.real]
        owners = {k for _, _, k in positive}
        if len(owners) == 1:
            k = owners.pop()
            zones[k].edges.append(eid)
            zones[k].weight += e.weight
            continue
        for lo, hi, k in positive:
            zones[k].segments.append((eid, lo, hi))
            zones[k].weight += density * (hi.real - lo.real)

    q1 = sum((z.weight for z in zones if z.player == P1), Fraction(0))
    q2 = sum((z.weight for z in zones if z.player == P2), Fraction(0))
    return ZoneReport(zones, q1, q2, vertex_owner, edge_intervals)


def payoff(net: WeightedNetwork, F: Sequence[NetworkPoint], S: Sequence[NetworkPoint]) -> Fraction:
    """P2's payoff ``Q2(F, S)``."""
    if not S:
        return Fraction(0)
    return compute_zones(net, Placement(tuple(F), tuple(S))).q2


# --------------------------------------------------------------------------
# candidate set


GAMMA, ORIGINAL, EPS_AFTER = "gamma-sphere", "original-vertex", "eps-after-facility"


@dataclass(frozen=True)
class Candidate:
    point: NetworkPoint
    kind: str
    source: Optional[int] = None  # source vertex (gamma) or facility index (eps)
    edge: Optional[int] = None


@dataclass
class CandidateSet:
    candidates: List[Candidate]

    @property
    def points(self) -> List[NetworkPoint]:
        return [c.point for c in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


def _require_real(F: Sequence[NetworkPoint]) -> None:
    for p in F:
        if isinstance(p, EdgePoint) and p.offset.eps != 0:
            raise PlacementError("P1 facilities must sit at real (non-infinitesimal) offsets")


def eps_after_points(net: WeightedNetwork, f: NetworkPoint) -> List[Tuple[int, NetworkPoint]]:
    """Points an infinitesimal distance away from ``f`` in every direction."""
    one = Fraction(1)
    if isinstance(f, Vertex):
        out = []
        for eid in sorted(net.adjacency[f.id]):
            e = net.edges[eid]
            off = ExtendedLength(Fraction(0), one) if e.u == f.id else ExtendedLength(e.length, -one)
            out.append((eid, make_point(net, eid, off)))
        return out
    return [
        (f.edge, make_point(net, f.edge, f.offset - (0, one))),
        (f.edge, make_point(net, f.edge, f.offset + (0, one))),
    ]


def nearest_facility_distances(net: WeightedNetwork, F: Sequence[NetworkPoint]) -> Dict[int, ExtendedLength]:
    sources = []
    for f in F:
        validate_point(net, f)
        if isinstance(f, Vertex):
            sources.append((f.id, ZERO))
        else:
            e = net.edges[f.edge]
            sources.append((e.u, f.offset))
            sources.append((e.v, ExtendedLength(e.length, Fraction(0)) - f.offset))
    return dijkstra(net, sources)


def candidate_set(net: WeightedNetwork, F: Sequence[NetworkPoint]) -> CandidateSet:
    """Vertices, distance-sphere points and eps-after points; contains an optimal P2 placement."""
    if not F:
        raise PlacementError("candidate set needs at least one P1 facility")
    _require_real(F)
    f_points = set(F)
    dF = nearest_facility_distances(net, F)
    out: List[Candidate] = []
    seen = set()

    def add(c: Candidate):
        if c.point in f_points or c.point in seen:
            return
        seen.add(c.point)
        out.append(c)

    for v in net.vertex_ids:
        add(Candidate(Vertex(v), ORIGINAL))

    for v in net.vertex_ids:
        if v not in dF:
            continue
        d_i = dF[v]
        dv = dijkstra(net, [(v, ZERO)])
        found = []
        for eid in net.edge_ids:
            e = net.edges[eid]
            L = ExtendedLength(e.length, Fraction(0))
            offs = []
            if e.u in dv:
                offs.append(d_i - dv[e.u])
            if e.v in dv:
                offs.append(L - (d_i - dv[e.v]))
            for t in sorted(set(offs)):
                if not (ZERO < t < L):
                    continue
                reach = ext_min(
                    dv[e.u] + t if e.u in dv else INFINITY,
                    dv[e.v] + (L - t) if e.v in dv else INFINITY,
                )
                if reach == d_i:
                    found.append((eid, t))
        for eid, t in sorted(found):
            add(Candidate(make_point(net, eid, t), GAMMA, source=v, edge=eid))

    for idx, f in enumerate(F):
        for eid, p in eps_after_points(net, f):
            add(Candidate(p, EPS_AFTER, source=idx, edge=eid))
    return CandidateSet(out)


# --------------------------------------------------------------------------
# bisectors


@dataclass(frozen=True)
class Bisector:
    point: NetworkPoint
    competitor: int  # index into F
    side: Optional[str]  # "x" (towards edge.u) / "y" (towards edge.v) for an edge facility


@dataclass
class BisectorSet:
    source: NetworkPoint
    bisectors: List[Bisector]

    @property
    def points(self) -> List[NetworkPoint]:
        return [b.point for b in self.bisectors]

    def __len__(self):
        return len(self.bisectors)


def _nearest_p1(arr: _Arrangement, n0: Node, n1: Node, lam: ExtendedLength, t: ExtendedLength, m: int) -> int:
    best = None
    for k in range(m):
        a = arr.dist[k].get(n0, INFINITY)
        b = arr.dist[k].get(n1, INFINITY)
        d = ext_min(a + t if a != INFINITY else INFINITY, b + lam - t if b != INFINITY else INFINITY)
        if best is None or (d, k) < best:
            best = (d, k)
    return best[1]


def _side(net: WeightedNetwork, s: NetworkPoint, b: NetworkPoint) -> Optional[str]:
    if not isinstance(s, EdgePoint):
        return None
    e = net.edges[s.edge]
    if isinstance(b, EdgePoint) and b.edge == s.edge:
        direct = b.offset - s.offset
        return "x" if direct < ZERO else "y"
    via_x = s.offset + distance(net, Vertex(e.u), b)
    via_y = (ExtendedLength(e.length, Fraction(0)) - s.offset) + distance(net, Vertex(e.v), b)
    return "x" if via_x <= via_y else "y"


def bisectors_for(net: WeightedNetwork, F: Sequence[NetworkPoint], s: NetworkPoint) -> BisectorSet:
    """Boundary points between a lone P2 facility at ``s`` and P1's facilities."""
    if s in set(F):
        raise PlacementError("s must not coincide with a P1 facility")
    facs = [(P1, i, p) for i, p in enumerate(F)] + [(P2, 0, s)]
    m = len(F)
    arr = _Arrangement(net, facs)
    is_p2 = lambda k: k == m  # noqa: E731

    found: Dict[NetworkPoint, int] = {}
    for eid in net.edge_ids:
        for o0, n0, o1, n1 in arr.segments[eid]:
            lam = o1 - o0
            ivs = arr.segment_intervals(n0, n1, lam)
            for (_, t, ka), (_, _, kb) in zip(ivs, ivs[1:]):
                if is_p2(ka) != is_p2(kb):
                    p = make_point(net, eid, o0 + t)
                    found.setdefault(p, _nearest_p1(arr, n0, n1, lam, t, m))
            # ownership flips exactly at a vertex (a tie won by P2)
            for node, iv in ((n0, ivs[0]), (n1, ivs[-1])):
                if node[0] != "v":
                    continue
                owner = arr.node_owner(node)
                if is_p2(owner) != is_p2(iv[2]):
                    p = Vertex(node[1])
                    found.setdefault(p, _nearest_p1(arr, node, node, ZERO, ZERO, m))
    out = [Bisector(p, k, _side(net, s, p)) for p, k in found.items()]
    out.sort(key=lambda b: point_key(b.point))
    return BisectorSet(s, out)


def safe_shift_bound(net: WeightedNetwork, placement: Placement, s_index: int) -> Fraction:
    """Largest shift of ``S[s_index]`` keeping it and all its bisectors on their edges."""
    s = placement.S[s_index]
    if not isinstance(s, EdgePoint):
        raise NotShiftable(f"{s} is a vertex")
    e = net.edges[s.edge]

    def room(eid: int, off: ExtendedLength) -> Fraction:
        edge = net.edges[eid]
        stops = [Fraction(0), edge.length] + [
            f.offset.real for f in placement.F if isinstance(f, EdgePoint) and f.edge == eid
        ]
        return min(abs(off.real - x) for x in stops)

    bound = room(s.edge, s.offset)
    for b in bisectors_for(net, placement.F, s).bisectors:
        if isinstance(b.point, Vertex):
            return Fraction(0)
        bound = min(bound, 2 * room(b.point.edge, b.point.offset))
    return bound


def shift_point(net: WeightedNetwork, p: EdgePoint, delta: Fraction) -> NetworkPoint:
    """Slide an edge point by ``delta`` (negative = towards edge.u)."""
    return make_point(net, p.edge, p.offset + (Fraction(delta), 0))


# --------------------------------------------------------------------------
# refinement by bisectors


@dataclass
class Refinement:
    """Network split so every candidate's lone zone is a union of whole arcs."""

    net: WeightedNetwork
    smap: SplitMap
    F: List[NetworkPoint]
    candidates: List[NetworkPoint]
    zones: List[Tuple[frozenset, frozenset]]


def _real_split_points(net: WeightedNetwork, pts) -> List[NetworkPoint]:
    out = []
    for p in pts:
        if isinstance(p, EdgePoint):
            real = p.offset.real
            if 0 < real < net.edges[p.edge].length:
                out.append(EdgePoint(p.edge, ExtendedLength(Fraction(real), Fraction(0))))
    return out


def lone_zone_items(net: WeightedNetwork, F: Sequence[NetworkPoint], s: NetworkPoint) -> Tuple[frozenset, frozenset]:
    """Vertices and whole edges in the zone of a lone P2 facility at ``s``."""
    rep = compute_zones(net, Placement(tuple(F), (s,)))
    z = rep.zone(P2, 0)
    if z.segments:
        raise RuntimeError("network is not refined enough: zone contains partial edges")
    return frozenset(z.vertices), frozenset(z.edges)


def refine_for_candidates(
    net: WeightedNetwork, F: Sequence[NetworkPoint], candidates: Sequence[NetworkPoint]
) -> Refinement:
    pts = list(F) + list(candidates)
    for c in candidates:
        pts.extend(bisectors_for(net, F, c).points)
    refined, smap = split_at_points(net, _real_split_points(net, pts))
    F2 = [smap.push(f) for f in F]
    C2 = [smap.push(c) for c in candidates]
    zones = [lone_zone_items(refined, F2, c) for c in C2]
    return Refinement(refined, smap, F2, C2, zones)


def zone_report_to_json(net: WeightedNetwork, rep: ZoneReport) -> dict:

    def ext(x: ExtendedLength):
        return {"real": format_fraction(x.real), "eps": format_fraction(x.eps)}

    return {
        "Q1": format_fraction(rep.q1),
        "Q2": format_fraction(rep.q2),
        "W": format_fraction(total_weight(net)),
        "zones": [
            {
                "player": z.player,
                "index": z.index,
                "point": point_to_json(z.point),
                "vertices": z.vertices,
                "edges": z.edges,
                "segments": [{"edge": e, "start": ext(a), "end": ext(b)} for e, a, b in z.segments],
                "weight": format_fraction(z.weight),
            }
            for z in rep.zones
        ],
    }
