import random
from fractions import Fraction
from itertools import combinations

from hypothesis import given, settings
from hypothesis import strategies as st

from _instances import random_graph, random_placement
from voronoi_game.approx import ARC, VERTEX, Element, SetSystem, approx_best_response, build_wmcp, greedy_wmcp
from voronoi_game.network import EdgePoint, ExtendedLength, Vertex, WeightedNetwork, total_weight
from voronoi_game.oracle import best_response_exact
from voronoi_game.zones import P2, Placement, compute_zones

E = ExtendedLength.of


def toy_system():
    elements = [Element(0, Fraction(3), VERTEX, ()), Element(1, Fraction(2), VERTEX, ()), Element(2, Fraction(1), VERTEX, ())]
    return SetSystem(elements, [Vertex(0), Vertex(1), Vertex(2)], [(0, 1), (1, 2), (2,)])


def test_greedy_single_pick():
    chosen, weight, trace = greedy_wmcp(toy_system(), 1)
    assert chosen == [0] and weight == 5
    assert trace.picks == [(0, 5)] and trace.covered == [5]


def test_greedy_two_picks():
    chosen, weight, _ = greedy_wmcp(toy_system(), 2)
    assert chosen == [0, 1] and weight == 6


def test_greedy_zero_budget():
    assert greedy_wmcp(toy_system(), 0)[:2] == ([], 0)


def test_greedy_ties_go_to_smaller_index():
    elements = [Element(0, Fraction(1), VERTEX, ()), Element(1, Fraction(1), VERTEX, ())]
    system = SetSystem(elements, [Vertex(0), Vertex(1)], [(1,), (0,)])
    assert greedy_wmcp(system, 1)[0] == [0]


def test_single_edge_sets():
    net = WeightedNetwork.build([(0, 1), (1, 1)], [(0, 0, 1, 1, 1)])
    system = build_wmcp(net, [Vertex(0)])
    by_point = dict(zip(system.candidates, system.sets))

    def covered(point):
        return sum(system.elements[e].weight for e in by_point[point])

    assert covered(Vertex(1)) == Fraction(3, 2)
    assert covered(EdgePoint(0, E(0, 1))) == 2
    far = {system.elements[e].origin for e in by_point[Vertex(1)]}
    assert (VERTEX, 1) in far and (ARC, 0, Fraction(1, 2), Fraction(1)) in far


def test_facilities_everywhere_leave_p1_its_vertices():
    net = WeightedNetwork.build([(0, 1), (1, 1)], [(0, 0, 1, 2, 2)])
    system = build_wmcp(net, [Vertex(0), Vertex(1)])
    W = total_weight(net)
    assert all(system.covered_weight([i]) < W for i in range(len(system.sets)))


def test_zero_budget_response():
    net = WeightedNetwork.build([(0, 1), (1, 1)], [(0, 0, 1, 1, 1)])
    assert approx_best_response(net, [Vertex(0)], 0) == ([], 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_set_system_weights(seed):
    rng = random.Random(seed)
    net = random_graph(rng, rng.randint(2, 6), 2)
    F, _ = random_placement(rng, net, rng.randint(1, 2), 0)
    system = build_wmcp(net, F)
    p1_vertices = sum(net.weights[f.id] for f in F if isinstance(f, Vertex))
    assert sum(el.weight for el in system.elements) == total_weight(net) - p1_vertices
    assert all(el.weight >= 0 for el in system.elements)
    for i, point in enumerate(system.candidates):
        lone = compute_zones(net, Placement(tuple(F), (point,))).zone(P2, 0).weight
        assert system.covered_weight([i]) == lone


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_coverage_equals_payoff_for_every_small_subset(seed):
    rng = random.Random(seed)
    net = random_graph(rng, rng.randint(2, 5), 2)
    F, _ = random_placement(rng, net, rng.randint(1, 2), 0)
    system = build_wmcp(net, F)
    n = len(system.candidates)
    for r in (1, 2):
        for A in combinations(range(n), r):
            q2 = compute_zones(net, Placement(tuple(F), tuple(system.candidates[i] for i in A))).q2
            assert system.covered_weight(A) == q2


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_greedy_is_monotone_and_large_budget_is_optimal(seed):
    rng = random.Random(seed)
    net = random_graph(rng, rng.randint(2, 5), 2)
    F, _ = random_placement(rng, net, 1, 0)
    system = build_wmcp(net, F)
    values = [greedy_wmcp(system, t)[1] for t in range(4)]
    assert values == sorted(values)
    n = len(system.candidates)
    assert approx_best_response(net, F, n)[1] == best_response_exact(net, F, n).best_Q2
