"""Exact maximum payoff of P2 on trees.

The tree is cut at P1's facilities.  Pieces never interact (a P2 facility
cannot reach across a P1 facility), so each piece gets a payoff profile
``mu(0..k)`` and the pieces are merged with an optimum resource allocation
DP.  A piece touching one facility is captured whole by one P2 facility
placed just beside it.  A piece touching several facilities is first
stripped of its hanging trees (their weight moves to the attachment
vertex), leaving a *bounded* subtree whose leaves are all facilities; that
one is solved by the memoised OPT recursion over auxiliary subtrees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

from .network import (
    ZERO,
    EdgePoint,
    ExtendedLength,
    NetworkError,
    NetworkPoint,
    SplitMap,
    Vertex,
    WeightedNetwork,
    cut_at_points,
    format_fraction,
    make_point,
    subnetwork,
    total_weight,
)
from .zones import Placement, candidate_set, compute_zones, refine_for_candidates

BASE_CASE_CANDIDATES = 2


class TreeStructureError(NetworkError):
    """Input network is not a tree."""


# --------------------------------------------------------------------------
# resource allocation


def _suffix_table(profiles: Sequence[Sequence[Fraction]], p: int):
    l = len(profiles)
    suf: List[List[Optional[Fraction]]] = [[None] * (p + 1) for _ in range(l + 1)]
    suf[l][0] = Fraction(0)
    for i in range(l - 1, -1, -1):
        g = profiles[i]
        for b in range(p + 1):
            best = None
            for x in range(b + 1):
                rest = suf[i + 1][b - x]
                if rest is None:
                    continue
                val = g[x] + rest
                if best is None or val > best:
                    best = val
            suf[i][b] = best
    return suf


def alloc(profiles: Sequence[Sequence[Fraction]], p: int) -> Tuple[Fraction, List[int]]:
    """Maximise ``sum g_i(p_i)`` subject to ``sum p_i = p``.

    Returns the optimum and the lexicographically smallest optimal split.
    """
    if not profiles:
        if p != 0:
            raise ValueError("cannot allocate a positive budget to no processors")
        return Fraction(0), []
    for g in profiles:
        if len(g) < p + 1:
            raise ValueError("every profile must be defined on 0..p")
    suf = _suffix_table(profiles, p)
    value = suf[0][p]
    split = []
    left = p
    for i, g in enumerate(profiles):
        for x in range(left + 1):
            rest = suf[i + 1][left - x]
            if rest is not None and g[x] + rest == suf[i][left]:
                split.append(x)
                left -= x
                break
    return value, split


def alloc_values(profiles: Sequence[Sequence[Fraction]], p: int) -> List[Fraction]:
    """Optimal allocation value for every budget ``0..p`` (max-plus convolution)."""
    best = [Fraction(0)] + [None] * p
    for g in profiles:
        nxt: List[Optional[Fraction]] = [None] * (p + 1)
        for b in range(p + 1):
            if best[b] is None:
                continue
            for x in range(p - b + 1):
                val = best[b] + g[x]
                if nxt[b + x] is None or val > nxt[b + x]:
                    nxt[b + x] = val
        best = nxt
    return best


# --------------------------------------------------------------------------
# partition


ZERO_FACILITIES, ONE_FACILITY, MANY_FACILITIES = "zero", "one", "many"


@dataclass
class Subtree:
    net: WeightedNetwork
    facilities: Tuple[int, ...]

    @property
    def kind(self) -> str:
        return (ZERO_FACILITIES, ONE_FACILITY, MANY_FACILITIES)[min(len(self.facilities), 2)]


@dataclass
class TreePartition:
    smap: SplitMap
    facility_vertices: Tuple[int, ...]
    subtrees: List[Subtree]


def _require_tree(tree: WeightedNetwork) -> None:
    if not tree.is_tree():
        raise TreeStructureError("input network is not a tree")


def partition_at_facilities(tree: WeightedNetwork, F: Sequence[NetworkPoint]) -> TreePartition:
    """Cut the tree at P1's facilities; each facility becomes a weight-0 leaf of every piece it borders."""
    _require_tree(tree)
    if not F:
        raise ValueError("partition needs at least one facility")
    for f in F:
        if isinstance(f, EdgePoint) and f.offset.eps != 0:
            raise ValueError("P1 facilities must sit at real offsets")
    smap, cut, pieces = cut_at_points(tree, F)
    subtrees = []
    for piece in pieces:
        if not piece.edges:
            continue
        net = subnetwork(smap.refined, piece.edges, zeroed=piece.boundary)
        subtrees.append(Subtree(net, piece.boundary))
    return TreePartition(smap, cut, subtrees)


def lone_facility_payoff(sub: Subtree, p: int) -> Fraction:
    """One P2 facility beside the only P1 facility takes everything but that facility's vertex."""
    if sub.kind != ONE_FACILITY:
        raise ValueError("subtree must border exactly one facility")
    if p <= 0:
        return Fraction(0)
    return total_weight(sub.net) - sub.net.weights[sub.facilities[0]]


@dataclass
class BoundedSubtree:
    net: WeightedNetwork
    facilities: Tuple[int, ...]
    folded: Dict[int, Tuple[Tuple[int, ...], Tuple[int, ...]]]


def fold_hanging(sub: Subtree) -> BoundedSubtree:
    """Collapse every facility-free hanging tree into the vertex it hangs from."""
    if sub.kind != MANY_FACILITIES:
        raise ValueError("only pieces bordering two or more facilities are folded")
    net = sub.net
    fac = set(sub.facilities)
    weights = dict(net.weights)
    alive_edges = set(net.edges)
    degree = {v: len(net.adjacency[v]) for v in net.weights}
    ledger: Dict[int, Tuple[List[int], List[int]]] = {v: ([], []) for v in net.weights}
    queue = sorted(v for v in net.weights if degree[v] == 1 and v not in fac)
    removed = set()
    while queue:
        leaf = queue.pop(0)
        (eid,) = [e for e in net.adjacency[leaf] if e in alive_edges]
        e = net.edges[eid]
        up = e.other(leaf)
        weights[up] += weights[leaf] + e.weight
        ledger[up][0].extend([leaf] + ledger[leaf][0])
        ledger[up][1].extend([eid] + ledger[leaf][1])
        alive_edges.discard(eid)
        removed.add(leaf)
        degree[up] -= 1
        if degree[up] == 1 and up not in fac:
            queue.append(up)
            queue.sort()
    edges = {eid: net.edges[eid] for eid in sorted(alive_edges)}
    kept = {v: weights[v] for v in sorted(net.weights) if v not in removed}
    folded = {
        v: (tuple(sorted(vs)), tuple(sorted(es)))
        for v, (vs, es) in ledger.items()
        if v in kept and (vs or es)
    }
    coords = {v: c for v, c in net.coords.items() if v in kept}
    return BoundedSubtree(WeightedNetwork(kept, edges, coords), tuple(sub.facilities), folded)


# --------------------------------------------------------------------------
# OPT on bounded subtrees


class AuxKey(NamedTuple):
    """Auxiliary subtree: ``root`` plus the branch through ``child`` (all branches if None)."""

    root: int
    child: Optional[int]
    served_vertices: FrozenSet[int]
    served_edges: FrozenSet[int]
    forbidden: FrozenSet[int]

    def canonical(self) -> tuple:
        return (
            self.root,
            -1 if self.child is None else self.child,
            tuple(sorted(self.served_vertices)),
            tuple(sorted(self.served_edges)),
            tuple(sorted(self.forbidden)),
        )


class MemoDependencyError(RuntimeError):
    """An OPT entry was requested before the entries it depends on."""


class MemoTable(dict):
    """``M[key] = [M[key, 0], ..., M[key, k]]``; entries are written once."""

    def __setitem__(self, key, value):
        if key in self:
            raise RuntimeError(f"memo entry {key.canonical()} written twice")
        super().__setitem__(key, tuple(value))


class BoundedSolver:
    """OPT(T, p) for every auxiliary subtree reachable from the whole bounded subtree.

    Candidates and bisectors are first made into vertices so that every
    candidate's zone is a set of whole arcs; points just beside a facility
    become zero-weight nodes joined by an infinitesimal arc.
    """

    def __init__(self, bounded: BoundedSubtree, k: int, base_case: int = BASE_CASE_CANDIDATES):
        self.bounded = bounded
        self.k = k
        self.base_case = base_case
        F = [Vertex(f) for f in bounded.facilities]
        points = candidate_set(bounded.net, F).points
        self.ref = ref = refine_for_candidates(bounded.net, F, points)
        self._build_tree()
        self.memo = MemoTable()
        self.choice: Dict[AuxKey, List[object]] = {}
        self._expansions: Dict[AuxKey, List[Tuple[int, Fraction, List[AuxKey]]]] = {}
        self.top = AuxKey(self.root, None, frozenset(), frozenset(), frozenset())
        self._fill()

    # -- tree with candidate nodes -------------------------------------------------

    def _build_tree(self) -> None:
        ref = self.ref
        g = ref.net
        next_id = max(g.weights) + 1
        self.vertex_weight: Dict[int, Fraction] = dict(g.weights)
        self.arc_weight: Dict[int, Fraction] = {eid: e.weight for eid, e in g.edges.items()}
        self.point_of: Dict[int, NetworkPoint] = {v: Vertex(v) for v in g.weights}

        inner: Dict[int, List[Tuple[ExtendedLength, int]]] = {}
        self.cand_nodes: List[int] = []
        for c in ref.candidates:
            if isinstance(c, Vertex):
                self.cand_nodes.append(c.id)
            else:
                node = next_id
                next_id += 1
                self.vertex_weight[node] = Fraction(0)
                self.point_of[node] = c
                inner.setdefault(c.edge, []).append((c.offset, node))
                self.cand_nodes.append(node)

        adj: Dict[int, List[Tuple[int, ExtendedLength, Optional[int]]]] = {v: [] for v in self.vertex_weight}
        for eid in g.edge_ids:
            e = g.edges[eid]
            L = ExtendedLength(e.length, Fraction(0))
            chain = [(ZERO, e.u)] + sorted(inner.get(eid, [])) + [(L, e.v)]
            for (o0, a), (o1, b) in zip(chain, chain[1:]):
                lam = o1 - o0
                item = eid if lam.real > 0 else None
                adj[a].append((b, lam, item))
                adj[b].append((a, lam, item))

        self.root = min(self.bounded.net.weights)
        self.parent: Dict[int, Optional[int]] = {self.root: None}
        self.parent_item: Dict[int, Optional[int]] = {self.root: None}
        self.depth: Dict[int, ExtendedLength] = {self.root: ZERO}
        self.children: Dict[int, List[int]] = {v: [] for v in adj}
        order = [self.root]
        for x in order:
            for y, lam, item in sorted(adj[x], key=lambda t: t[0]):
                if y in self.depth:
                    continue
                self.parent[y] = x
                self.parent_item[y] = item
                self.depth[y] = self.depth[x] + lam
                self.children[x].append(y)
                order.append(y)
        if len(order) != len(adj):
            raise TreeStructureError("bounded subtree is not connected")

        self.below: Dict[int, FrozenSet[int]] = {}
        self.below_items: Dict[int, FrozenSet[int]] = {}
        for x in reversed(order):
            nodes = {x}
            items = set()
            if self.parent_item[x] is not None:
                items.add(self.parent_item[x])
            for y in self.children[x]:
                nodes |= self.below[y]
                items |= self.below_items[y]
            self.below[x] = frozenset(nodes)
            self.below_items[x] = frozenset(items)

        self.cand_set = frozenset(self.cand_nodes)
        self.zone_of: Dict[int, Tuple[FrozenSet[int], FrozenSet[int]]] = {}
        for node, (zv, za) in zip(self.cand_nodes, ref.zones):
            self.zone_of[node] = (
                frozenset(v for v in zv if self.vertex_weight[v] > 0),
                frozenset(a for a in za if self.arc_weight[a] > 0),
            )

    # -- auxiliary subtrees ---------------------------------------------------------

    def aux_nodes(self, key: AuxKey) -> FrozenSet[int]:
        if key.child is None:
            return self.below[key.root]
        return self.below[key.child] | {key.root}

    def aux_items(self, key: AuxKey) -> FrozenSet[int]:
        if key.child is None:
            return self.below_items[key.root]
        return self.below_items[key.child]

    def _make_key(self, root, child, served_v, served_a, forbidden) -> AuxKey:
        nodes = self.below[child] | {root}
        items = self.below_items[child]
        return AuxKey(root, child, served_v & nodes, served_a & items, forbidden & nodes & self.cand_set)

    def eligible(self, key: AuxKey) -> List[int]:
        nodes = self.aux_nodes(key)
        out = [c for c in self.cand_nodes if c in nodes and c not in key.forbidden]
        if key.child is not None:
            out = [c for c in out if c != key.root]
        return sorted(out, key=lambda c: (self.depth[c], c))

    def gain(self, key: AuxKey, extra_v, extra_a) -> Fraction:
        nodes = self.aux_nodes(key)
        items = self.aux_items(key)
        total = sum((self.vertex_weight[v] for v in extra_v if v in nodes and v not in key.served_vertices), Fraction(0))
        total += sum((self.arc_weight[a] for a in extra_a if a in items and a not in key.served_edges), Fraction(0))
        return total

    def expand(self, key: AuxKey, j: int) -> Tuple[Fraction, List[AuxKey]]:
        """Place the closest-to-root facility at ``j``; return its gain and the child subtrees."""
        zv, za = self.zone_of[j]
        gain = self.gain(key, zv, za)
        path = [j]
        while path[-1] != key.root:
            path.append(self.parent[path[-1]])
        path.reverse()
        served_v = key.served_vertices | zv
        served_a = key.served_edges | za
        forbidden = key.forbidden | {c for c in self.cand_nodes if self.depth[c] < self.depth[j]}
        kids: List[AuxKey] = []
        for i, node in enumerate(path):
            if node == j:
                branches = self.children[node]
            elif node == key.root and key.child is not None:
                branches = []
            else:
                branches = [y for y in self.children[node] if y != path[i + 1]]
            for y in branches:
                kids.append(self._make_key(node, y, served_v, served_a, forbidden))
        return gain, kids

    def _base_value(self, key: AuxKey, subset: Sequence[int]) -> Fraction:
        zv = frozenset().union(*(self.zone_of[c][0] for c in subset)) if subset else frozenset()
        za = frozenset().union(*(self.zone_of[c][1] for c in subset)) if subset else frozenset()
        return self.gain(key, zv, za)

    # -- table filling -------------------------------------------------------------

    def _fill(self) -> None:
        keys = {self.top}
        stack = [self.top]
        while stack:
            key = stack.pop()
            cands = self.eligible(key)
            if len(cands) <= self.base_case:
                continue
            exps = []
            for j in cands:
                gain, kids = self.expand(key, j)
                exps.append((j, gain, kids))
                for kid in kids:
                    if kid not in keys:
                        keys.add(kid)
                        stack.append(kid)
            self._expansions[key] = exps
        # a child subtree always has fewer nodes than its parent
        ordered = sorted(keys, key=lambda kk: (len(self.aux_nodes(kk)), kk.canonical()))
        for key in ordered:
            self._fill_row(key)

    def _fill_row(self, key: AuxKey) -> None:
        k = self.k
        row = [Fraction(0)] * (k + 1)
        choice: List[object] = [None] * (k + 1)
        cands = self.eligible(key)
        if key not in self._expansions:
            for p in range(1, k + 1):
                for r in range(1, min(p, len(cands)) + 1):
                    for subset in combinations(cands, r):
                        val = self._base_value(key, subset)
                        if val > row[p]:
                            row[p], choice[p] = val, ("base", subset)
        else:
            for j, gain, kids in self._expansions[key]:
                rows = []
                for kid in kids:
                    if kid not in self.memo:
                        raise MemoDependencyError(f"entry for {kid.canonical()} missing")
                    rows.append(self.memo[kid])
                conv = alloc_values(rows, k - 1) if k >= 1 else []
                for p in range(1, k + 1):
                    val = gain + conv[p - 1]
                    if val > row[p]:
                        row[p], choice[p] = val, ("pick", j)
        self.memo[key] = row
        self.choice[key] = choice

    def profile(self) -> List[Fraction]:
        return list(self.memo[self.top])

    def witness(self, p: int, key: Optional[AuxKey] = None) -> List[int]:
        """Candidate nodes realising ``M[key, p]``."""
        key = self.top if key is None else key
        p = min(p, self.k)
        ch = self.choice[key][p] if p > 0 else None
        if ch is None:
            return []
        tag, what = ch
        if tag == "base":
            return list(what)
        j = what
        gain, kids = next((g, ks) for jj, g, ks in self._expansions[key] if jj == j)
        rows = [self.memo[kid][:p] for kid in kids]
        value, split = alloc(rows, p - 1)
        if gain + value != self.memo[key][p]:
            raise RuntimeError("witness reconstruction disagrees with the memo table")
        out = [j]
        for kid, pk in zip(kids, split):
            out.extend(self.witness(pk, kid))
        return out

    def lift(self, node: int) -> NetworkPoint:
        """Candidate node -> point of the bounded subtree's network."""
        return self.ref.smap.lift(self.point_of[node])

    def memo_to_json(self) -> str:
        rows = [
            {"key": [list(x) if isinstance(x, tuple) else x for x in key.canonical()],
             "row": [format_fraction(v) for v in self.memo[key]]}
            for key in sorted(self.memo, key=lambda kk: (len(self.aux_nodes(kk)), kk.canonical()))
        ]
        return json.dumps(rows, sort_keys=True)


def opt_bounded(bounded: BoundedSubtree, p: int, key: Optional[AuxKey] = None) -> Fraction:
    """``M[key, p]`` (the whole bounded subtree by default)."""
    solver = BoundedSolver(bounded, p)
    key = solver.top if key is None else key
    if key not in solver.memo:
        raise MemoDependencyError(f"no entry for {key.canonical()}")
    return solver.memo[key][p]


# --------------------------------------------------------------------------
# whole tree


class TreeSolution(NamedTuple):
    S: List[NetworkPoint]
    Q2: Fraction


@dataclass
class _PieceSolver:
    sub: Subtree
    k: int
    bounded: Optional[BoundedSolver] = None
    profile: List[Fraction] = field(default_factory=list)

    def __post_init__(self):
        if self.sub.kind == ONE_FACILITY:
            self.profile = [lone_facility_payoff(self.sub, p) for p in range(self.k + 1)]
        elif self.sub.kind == MANY_FACILITIES:
            self.bounded = BoundedSolver(fold_hanging(self.sub), self.k)
            self.profile = self.bounded.profile()
        else:
            w = total_weight(self.sub.net)
            self.profile = [Fraction(0)] + [w] * self.k

    def witness(self, p: int) -> List[NetworkPoint]:
        """Points of the (refined) tree realising ``profile[p]``."""
        if p == 0 or self.profile[p] == 0:
            return []
        net = self.sub.net
        if self.sub.kind == ONE_FACILITY:
            f = self.sub.facilities[0]
            (eid,) = net.adjacency[f]
            e = net.edges[eid]
            off = ExtendedLength(Fraction(0), Fraction(1)) if e.u == f else ExtendedLength(e.length, Fraction(-1))
            return [make_point(net, eid, off)]
        if self.sub.kind == MANY_FACILITIES:
            return [self.bounded.lift(n) for n in self.bounded.witness(p)]
        return [Vertex(min(net.weights))]


def piece_profiles(tree: WeightedNetwork, F: Sequence[NetworkPoint], k: int) -> Tuple[TreePartition, List[_PieceSolver]]:
    part = partition_at_facilities(tree, F)
    return part, [_PieceSolver(sub, k) for sub in part.subtrees]


def solve_tree(tree: WeightedNetwork, F: Sequence[NetworkPoint], k: int) -> TreeSolution:
    """Optimal P2 placement of at most ``k`` facilities against ``F`` on a tree."""
    _require_tree(tree)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return TreeSolution([], Fraction(0))
    if not F:
        return TreeSolution([Vertex(min(tree.weights))], total_weight(tree))
    part, pieces = piece_profiles(tree, F, k)
    value, split = alloc([pc.profile for pc in pieces], k)
    S: List[NetworkPoint] = []
    for pc, p in zip(pieces, split):
        S.extend(part.smap.lift(q) for q in pc.witness(p))
    q2 = compute_zones(tree, Placement(tuple(F), tuple(S))).q2 if S else Fraction(0)
    if q2 != value:
        raise RuntimeError(f"tree DP value {value} but witness earns {q2}")
    return TreeSolution(S, q2)
