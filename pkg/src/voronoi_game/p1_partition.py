"""P1's balanced placement on trees.

``tau`` points are chosen so that cutting the tree at them leaves pieces of
weight at most ``W/(tau+1)`` each (a cut vertex loses its own weight).  With
``m`` facilities placed this way, ``k`` P2 facilities can collect at most
``k`` pieces, so P1 keeps at least ``(m-k+1)/(m+1) W``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .network import (
    EdgePoint,
    ExtendedLength,
    NetworkPoint,
    Vertex,
    WeightedNetwork,
    cut_at_points,
    make_point,
    subnetwork,
    total_weight,
)
from .tree_solver import TreeStructureError


def _rooted(tree: WeightedNetwork, root: int):
    parent: Dict[int, Optional[Tuple[int, int]]] = {root: None}
    order = [root]
    for x in order:
        for y, e in tree.neighbors(x):
            if y not in parent:
                parent[y] = (x, e.id)
                order.append(y)
    return parent, order


def extended_weights(tree: WeightedNetwork, root: int) -> Dict[int, Fraction]:
    """``w_T(v)``: weight of v's subtree including the edges down to its children."""
    if not tree.is_tree():
        raise TreeStructureError("input network is not a tree")
    parent, order = _rooted(tree, root)
    wt = {v: tree.weights[v] for v in tree.weights}
    for v in reversed(order):
        if parent[v] is not None:
            up, eid = parent[v]
            wt[up] += wt[v] + tree.edges[eid].weight
    return wt


def find_split_point(tree: WeightedNetwork, tau: int, threshold: Optional[Fraction] = None) -> NetworkPoint:
    """A point cutting off at least ``threshold`` (default W/(tau+1)) in pieces of at most that weight."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if not tree.weights:
        raise ValueError("empty tree")
    root = min(tree.weights)
    W = total_weight(tree)
    theta = W / (tau + 1) if threshold is None else threshold
    if W == 0:
        return Vertex(root)
    wt = extended_weights(tree, root)
    parent, _ = _rooted(tree, root)
    children: Dict[int, List[Tuple[int, int]]] = {v: [] for v in tree.weights}
    for v, pe in parent.items():
        if pe is not None:
            children[pe[0]].append((v, pe[1]))

    v = root
    while True:
        heavy = [c for c, _ in sorted(children[v]) if wt[c] >= theta]
        if not heavy:
            break
        v = heavy[0]

    for c, eid in sorted(children[v]):
        e = tree.edges[eid]
        if wt[c] + e.weight > theta:
            rho = e.weight / e.length
            d = (theta - wt[c]) / rho
            off = d if c == e.u else e.length - d
            return make_point(tree, eid, ExtendedLength(off, Fraction(0)))
    return Vertex(v)


@dataclass
class BalancedPartition:
    points: List[NetworkPoint]
    parts: List[Tuple[WeightedNetwork, Fraction]]
    threshold: Fraction


def _parts(tree: WeightedNetwork, P: List[NetworkPoint]):
    smap, _, pieces = cut_at_points(tree, P)
    out = []
    for piece in pieces:
        if not piece.edges:
            continue
        net = subnetwork(smap.refined, piece.edges, zeroed=piece.boundary)
        out.append((net, total_weight(net)))
    if not tree.edges and not P:
        out.append((tree, total_weight(tree)))
    return smap, out


def _extra_point(tree: WeightedNetwork, P: List[NetworkPoint]) -> NetworkPoint:
    taken = set(P)
    for v in tree.vertex_ids:
        if Vertex(v) not in taken:
            return Vertex(v)
    for eid in tree.edge_ids:
        e = tree.edges[eid]
        lo = Fraction(0)
        marks = sorted(p.offset.real for p in P if isinstance(p, EdgePoint) and p.edge == eid)
        # midpoint of the first gap on this edge
        hi = marks[0] if marks else e.length
        return make_point(tree, eid, ExtendedLength((lo + hi) / 2, Fraction(0)))
    raise ValueError("no room for another point")


def balanced_partition(tree: WeightedNetwork, tau: int) -> BalancedPartition:
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if not tree.is_tree():
        raise TreeStructureError("input network is not a tree")
    theta = total_weight(tree) / (tau + 1)
    P: List[NetworkPoint] = []
    for _ in range(tau):
        smap, parts = _parts(tree, P)
        heavy = [net for net, w in parts if w > theta]
        if heavy:
            p = smap.lift(find_split_point(heavy[0], tau, theta)) if P else find_split_point(tree, tau, theta)
        else:
            p = _extra_point(tree, P)
        P.append(p)
    _, parts = _parts(tree, P)
    return BalancedPartition(P, parts, theta)


def p1_safe_placement(tree: WeightedNetwork, m: int, k: int) -> Tuple[List[NetworkPoint], Fraction]:
    """P1's balanced placement and the payoff it guarantees against ``k`` P2 facilities."""
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    part = balanced_partition(tree, m)
    return part.points, Fraction(m - k + 1, m + 1) * total_weight(tree)
