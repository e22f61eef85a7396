"""Brute-force best responses for P2.

P2's zone is the union of the zones each of its facilities would own
alone against ``F`` (a point goes to P2 iff some P2 facility is at least as
close as every P1 facility).  So every point is turned once into a bitmask
over atomic pieces of the network, and a subset's payoff is the weight of
the OR of its masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Sequence, Tuple

from .network import ExtendedLength, NetworkPoint, Vertex, WeightedNetwork, make_point
from .zones import P2, Placement, candidate_set, compute_zones

DEFAULT_CAP = 10**7


class SearchTooLarge(RuntimeError):
    """The number of subsets to evaluate exceeds the configured cap."""


@dataclass
class OracleResult:
    best_S: List[NetworkPoint]
    best_Q2: Fraction
    evaluated_count: int


class UnionEvaluator:
    """Exact payoff of any subset of a fixed list of P2 positions."""

    def __init__(self, net: WeightedNetwork, F: Sequence[NetworkPoint], points: Sequence[NetworkPoint]):
        self.net = net
        self.F = list(F)
        self.points = list(points)
        lone = [compute_zones(net, Placement(tuple(F), (p,))).zone(P2, 0) for p in self.points]

        cuts = {eid: {Fraction(0), e.length} for eid, e in net.edges.items()}
        for z in lone:
            for eid, lo, hi in z.segments:
                cuts[eid].update((lo.real, hi.real))

        atoms: List[Tuple[str, int, Fraction, Fraction]] = [("v", v, 0, 0) for v in net.vertex_ids]
        weights: List[Fraction] = [net.weights[v] for v in net.vertex_ids]
        for eid in net.edge_ids:
            e = net.edges[eid]
            marks = sorted(cuts[eid])
            for lo, hi in zip(marks, marks[1:]):
                atoms.append(("e", eid, lo, hi))
                weights.append(e.weight * (hi - lo) / e.length)
        self.atoms = atoms

        masks = []
        for z in lone:
            verts, full = set(z.vertices), set(z.edges)
            segs = {}
            for eid, lo, hi in z.segments:
                segs.setdefault(eid, []).append((lo.real, hi.real))
            mask = 0
            for bit, (kind, ident, lo, hi) in enumerate(atoms):
                if kind == "v":
                    hit = ident in verts
                else:
                    mid = (lo + hi) / 2
                    hit = ident in full or any(a <= mid <= b for a, b in segs.get(ident, ()))
                if hit:
                    mask |= 1 << bit
            masks.append(mask)
        self.masks = masks

        # integer weights with a common denominator, looked up a byte at a time
        self.scale = math.lcm(*(w.denominator for w in weights)) if weights else 1
        ints = [int(w * self.scale) for w in weights]
        self._tables = []
        for start in range(0, len(ints), 8):
            chunk = ints[start : start + 8]
            table = [0] * 256
            for byte in range(1, 256):
                low = byte & -byte
                bit = low.bit_length() - 1
                table[byte] = table[byte ^ low] + (chunk[bit] if bit < len(chunk) else 0)
            self._tables.append(table)

    def int_weight(self, mask: int) -> int:
        total = 0
        for table in self._tables:
            total += table[mask & 255]
            mask >>= 8
        return total

    def weight(self, mask: int) -> Fraction:
        return Fraction(self.int_weight(mask), self.scale)

    def subset_payoff(self, idx: Sequence[int]) -> Fraction:
        mask = 0
        for i in idx:
            mask |= self.masks[i]
        return self.weight(mask)

    def best_subset(self, k: int, cap: int = DEFAULT_CAP) -> Tuple[Tuple[int, ...], Fraction, int]:
        """Maximum over subsets of size <= k; ties go to the lexicographically smallest index tuple."""
        n = len(self.points)
        k = max(0, min(k, n))
        total = sum(math.comb(n, r) for r in range(k + 1))
        if total > cap:
            raise SearchTooLarge(f"{total} subsets exceed the cap of {cap}")
        best_w, best = 0, ()
        masks = self.masks
        for r in range(1, k + 1):
            for combo in combinations(range(n), r):
                m = 0
                for i in combo:
                    m |= masks[i]
                w = self.int_weight(m)
                if w > best_w or (w == best_w and combo < best):
                    best_w, best = w, combo
        return best, Fraction(best_w, self.scale), total


def best_response_exact(
    net: WeightedNetwork, F: Sequence[NetworkPoint], k: int, cap: int = DEFAULT_CAP
) -> OracleResult:
    """Exact maximum payoff of P2 by exhaustive search over the candidate set."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return OracleResult([], Fraction(0), 1)
    points = candidate_set(net, F).points
    ev = UnionEvaluator(net, F, points)
    idx, q2, count = ev.best_subset(k, cap)
    best_S = [points[i] for i in idx]
    if best_S:
        check = compute_zones(net, Placement(tuple(F), tuple(best_S))).q2
        if check != q2:
            raise RuntimeError(f"union payoff {q2} disagrees with zone payoff {check}")
    return OracleResult(best_S, q2, count)


def grid_points(net: WeightedNetwork, F: Sequence[NetworkPoint], grid_denominator: int) -> List[NetworkPoint]:
    """Vertices plus every edge point at a multiple of length/grid_denominator, minus F."""
    if grid_denominator < 1:
        raise ValueError("grid_denominator must be >= 1")
    taken = set(F)
    pts: List[NetworkPoint] = [Vertex(v) for v in net.vertex_ids]
    for eid in net.edge_ids:
        e = net.edges[eid]
        for j in range(1, grid_denominator):
            pts.append(make_point(net, eid, ExtendedLength(e.length * j / grid_denominator, Fraction(0))))
    return [p for p in pts if p not in taken]


def continuous_probe(
    net: WeightedNetwork,
    F: Sequence[NetworkPoint],
    k: int,
    grid_denominator: int,
    cap: int = DEFAULT_CAP,
) -> Fraction:
    """Best payoff of P2 when restricted to a regular grid of real positions."""
    if k <= 0:
        return Fraction(0)
    ev = UnionEvaluator(net, F, grid_points(net, F, grid_denominator))
    return ev.best_subset(k, cap)[1]
