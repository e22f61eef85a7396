"""Random instance generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from voronoi_game.network import EdgePoint, ExtendedLength, Vertex, WeightedNetwork, make_point

FIXTURES = Path(__file__).parent / "fixtures"

SMALL_RATIONALS = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]
LENGTHS = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]


def random_tree(rng: random.Random, n: int, length_is_weight: bool = False, coords: bool = False) -> WeightedNetwork:
    vertices = []
    for v in range(n):
        item = (v, rng.choice(SMALL_RATIONALS))
        if coords:
            item += (float(v), float(rng.randint(0, 3)))
        vertices.append(item)
    edges = []
    for v in range(1, n):
        length = rng.choice(LENGTHS)
        weight = length if length_is_weight else rng.choice(SMALL_RATIONALS)
        edges.append((v - 1, rng.randrange(v), v, length, weight))
    return WeightedNetwork.build(vertices, edges)


def random_graph(rng: random.Random, n: int, extra: int) -> WeightedNetwork:
    """Connected graph: a random tree plus up to ``extra`` chords."""
    tree = random_tree(rng, n)
    edges = [(e.id, e.u, e.v, e.length, e.weight) for e in tree.edges.values()]
    pairs = {(e.u, e.v) for e in tree.edges.values()}
    for _ in range(extra):
        if n < 3:
            break
        u, v = sorted(rng.sample(range(n), 2))
        if (u, v) in pairs:
            continue
        pairs.add((u, v))
        edges.append((len(edges), u, v, rng.choice(LENGTHS), rng.choice(SMALL_RATIONALS)))
    return WeightedNetwork.build(tree.weights.items(), edges)


def random_point(rng: random.Random, net: WeightedNetwork, vertex_bias: float = 0.6):
    if not net.edges or rng.random() < vertex_bias:
        return Vertex(rng.choice(net.vertex_ids))
    eid = rng.choice(net.edge_ids)
    e = net.edges[eid]
    return make_point(net, eid, ExtendedLength(e.length * Fraction(rng.randint(1, 7), 8), Fraction(0)))


def random_facilities(rng: random.Random, net: WeightedNetwork, m: int):
    out = []
    while len(out) < m:
        p = random_point(rng, net)
        if p not in out:
            out.append(p)
    return out


def random_placement(rng: random.Random, net: WeightedNetwork, m: int, k: int):
    F = random_facilities(rng, net, m)
    S = []
    tries = 0
    while len(S) < k and tries < 50:
        tries += 1
        p = random_point(rng, net, vertex_bias=0.4)
        if rng.random() < 0.2 and isinstance(p, EdgePoint):
            p = EdgePoint(p.edge, ExtendedLength(p.offset.real, Fraction(rng.choice([-1, 1]))))
        if p not in F and p not in S:
            S.append(p)
    return F, S


def tree_suite(seed: int, count: int, max_n: int = 8, max_m: int = 3, max_k: int = 3):
    """(tree, F, k) triples of the size the exhaustive oracle handles comfortably."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(2, max_n)
        tree = random_tree(rng, n, length_is_weight=rng.random() < 0.5)
        F = random_facilities(rng, tree, rng.randint(1, max_m))
        out.append((tree, F, rng.randint(1, max_k)))
    return out
