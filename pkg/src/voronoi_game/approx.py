"""Greedy best response on general networks via weighted maximum coverage.

The network is split at every candidate, every bisector of a lone candidate
facility and every P1 facility, so each candidate's zone becomes a set of
whole arcs and vertices.  P2's zone for several facilities is the union of
their lone zones, hence the payoff of any candidate subset is exactly the
covered weight of the corresponding sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Sequence, Tuple

from .network import NetworkPoint, Vertex, WeightedNetwork, format_fraction, point_to_json
from .zones import Placement, candidate_set, compute_zones, refine_for_candidates

VERTEX, ARC = "vertex", "arc"


class Element(NamedTuple):
    id: int
    weight: Fraction
    kind: str
    origin: tuple  # ("vertex", id) or ("arc", edge id, lo, hi) in original coordinates


@dataclass
class SetSystem:
    elements: List[Element]
    candidates: List[NetworkPoint]
    sets: List[Tuple[int, ...]]

    def covered_weight(self, chosen: Sequence[int]) -> Fraction:
        ids = set()
        for i in chosen:
            ids.update(self.sets[i])
        return sum((self.elements[e].weight for e in ids), Fraction(0))

    def to_json(self) -> str:
        doc = {
            "elements": [
                {"id": el.id, "weight": format_fraction(el.weight), "kind": el.kind,
                 "origin": [format_fraction(x) if isinstance(x, Fraction) else x for x in el.origin]}
                for el in self.elements
            ],
            "sets": [
                {"candidate": point_to_json(c), "elements": list(s)}
                for c, s in zip(self.candidates, self.sets)
            ],
        }
        return json.dumps(doc, sort_keys=True)


@dataclass
class GreedyTrace:
    picks: List[Tuple[int, Fraction]] = field(default_factory=list)
    covered: List[Fraction] = field(default_factory=list)


def build_wmcp(net: WeightedNetwork, F: Sequence[NetworkPoint]) -> SetSystem:
    """One set per candidate over the arcs and non-facility vertices of the split network."""
    cands = candidate_set(net, F).points
    ref = refine_for_candidates(net, F, cands)
    g, smap = ref.net, ref.smap
    taken = {f.id for f in ref.F if isinstance(f, Vertex)}

    elements: List[Element] = []
    index: Dict[tuple, int] = {}
    for v in g.vertex_ids:
        if v in taken or v not in smap.vertex_origin or not isinstance(smap.vertex_origin[v], Vertex):
            continue
        index[(VERTEX, v)] = len(elements)
        elements.append(Element(len(elements), g.weights[v], VERTEX, (VERTEX, smap.vertex_origin[v].id)))
    for eid in g.edge_ids:
        orig, lo, hi = smap.arc_origin[eid]
        if lo > hi:
            lo, hi = hi, lo
        index[(ARC, eid)] = len(elements)
        elements.append(Element(len(elements), g.edges[eid].weight, ARC, (ARC, orig, lo, hi)))

    sets = []
    for zv, za in ref.zones:
        ids = [index[(VERTEX, v)] for v in zv if (VERTEX, v) in index]
        ids += [index[(ARC, a)] for a in za]
        sets.append(tuple(sorted(ids)))
    return SetSystem(elements, cands, sets)


def greedy_wmcp(system: SetSystem, tau: int) -> Tuple[List[int], Fraction, GreedyTrace]:
    """Pick up to ``tau`` sets by largest marginal gain; ties to the smaller index, stop at zero gain."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    covered = set()
    chosen: List[int] = []
    total = Fraction(0)
    trace = GreedyTrace()
    for _ in range(tau):
        best, best_gain = None, Fraction(0)
        for i, s in enumerate(system.sets):
            if i in chosen:
                continue
            gain = sum((system.elements[e].weight for e in s if e not in covered), Fraction(0))
            if gain > best_gain:
                best, best_gain = i, gain
        if best is None:
            break
        chosen.append(best)
        covered.update(system.sets[best])
        total += best_gain
        trace.picks.append((best, best_gain))
        trace.covered.append(total)
    return chosen, total, trace


def approx_best_response(net: WeightedNetwork, F: Sequence[NetworkPoint], k: int) -> Tuple[List[NetworkPoint], Fraction]:
    """Greedy placement of at most ``k`` facilities; at least (1 - 1/e) of the optimum."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return [], Fraction(0)
    system = build_wmcp(net, F)
    chosen, covered, _ = greedy_wmcp(system, k)
    S = [system.candidates[i] for i in chosen]
    q2 = compute_zones(net, Placement(tuple(F), tuple(S))).q2 if S else Fraction(0)
    if q2 != covered:
        raise RuntimeError(f"covered weight {covered} but placement earns {q2}")
    return S, q2
