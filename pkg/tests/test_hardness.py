from fractions import Fraction

import networkx as nx
import pytest

from _instances import FIXTURES
from voronoi_game.hardness import (
    NoExtraction,
    SimpleGraph,
    brute_force_dominating_set,
    extract_dominating_set,
    is_dominating_set,
    parse_edge_list,
    reduce_dominating_set,
    scale_weights,
)
from voronoi_game.network import EdgePoint, ExtendedLength, Vertex
from voronoi_game.oracle import best_response_exact
from voronoi_game.zones import P2, Placement, compute_zones

TRIANGLE = SimpleGraph.of(3, [(0, 1), (1, 2), (0, 2)])
PATH4 = SimpleGraph.of(4, [(0, 1), (1, 2), (2, 3)])


def test_triangle_reduction():
    inst = reduce_dominating_set(TRIANGLE, 1)
    assert len(inst.net.weights) == 6 and len(inst.net.edges) == 6
    assert inst.w_e == Fraction(1, 8) and inst.delta == 3
    assert all(w == 1 for w in inst.net.weights.values())
    assert all(e.length == e.weight == inst.w_e for e in inst.net.edges.values())
    assert inst.F == (Vertex(3), Vertex(4), Vertex(5))


def test_single_vertex_reduction():
    inst = reduce_dominating_set(SimpleGraph.of(1, []), 1)
    assert len(inst.net.edges) == 1 and inst.delta == 1


def test_path_of_four_needs_two():
    inst = reduce_dominating_set(PATH4, 1)
    assert inst.delta == 4
    assert best_response_exact(inst.net, list(inst.F), 1).best_Q2 < 4
    assert not brute_force_dominating_set(PATH4, 1)


def test_budget_above_vertex_count_rejected():
    with pytest.raises(ValueError):
        reduce_dominating_set(TRIANGLE, 4)


def test_extract_vertex_placement():
    inst = reduce_dominating_set(TRIANGLE, 1)
    assert extract_dominating_set(inst, [Vertex(1)]) == [1]


def test_extract_point_beside_pendant_facility():
    inst = reduce_dominating_set(SimpleGraph.of(1, []), 1)
    p = EdgePoint(0, ExtendedLength.of(inst.w_e, -1))
    assert extract_dominating_set(inst, [p]) == [0]


def test_extract_below_threshold():
    inst = reduce_dominating_set(PATH4, 1)
    with pytest.raises(NoExtraction):
        extract_dominating_set(inst, [Vertex(1)])


def test_brute_force_examples():
    assert brute_force_dominating_set(TRIANGLE, 1)
    assert not brute_force_dominating_set(PATH4, 1)
    star = SimpleGraph.of(6, [(0, i) for i in range(1, 6)])
    assert brute_force_dominating_set(star, 1)
    with pytest.raises(ValueError):
        brute_force_dominating_set(SimpleGraph.of(21, []), 3)


def test_scale_by_one_is_identity():
    inst = reduce_dominating_set(TRIANGLE, 1)
    assert scale_weights(inst, 1) == inst


def test_scaled_triangle():
    inst = reduce_dominating_set(TRIANGLE, 1)
    big = scale_weights(inst, 8)
    assert all(e.weight == 1 for e in big.net.edges.values())
    assert all(w == 8 for w in big.net.weights.values())
    assert big.delta == 24
    small_res = best_response_exact(inst.net, list(inst.F), 1)
    big_res = best_response_exact(big.net, list(big.F), 1)
    assert (small_res.best_Q2 >= inst.delta) == (big_res.best_Q2 >= big.delta)
    assert small_res.best_S == big_res.best_S


def test_edge_payoff_stays_below_one_vertex():
    inst = reduce_dominating_set(PATH4, 2)
    res = best_response_exact(inst.net, list(inst.F), 2)
    rep = compute_zones(inst.net, Placement(inst.F, tuple(res.best_S)))
    vertex_part = sum(inst.net.weights[v] for v in rep.player_vertices(P2))
    n_edges = len(inst.net.edges)
    assert rep.q2 - vertex_part <= n_edges * inst.w_e < 1


def test_parse_edge_list():
    g = parse_edge_list((FIXTURES / "triangle.edges").read_text())
    assert g == TRIANGLE
    with pytest.raises(ValueError):
        parse_edge_list("2\n0 0\n")
    with pytest.raises(ValueError):
        parse_edge_list("2\n0 1 2\n")


def _atlas(max_n):
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() > max_n:
            break
        if nx.is_connected(g):
            yield SimpleGraph.of(g.number_of_nodes(), g.edges())


@pytest.mark.parametrize("graph", list(_atlas(4)), ids=lambda g: f"n{g.n}-{len(g.edges)}e")
def test_round_trip_small_graphs(graph):
    for k in range(graph.n + 1):
        inst = reduce_dominating_set(graph, k)
        res = best_response_exact(inst.net, list(inst.F), k)
        reached = res.best_Q2 >= inst.delta
        assert reached == brute_force_dominating_set(graph, k)
        if reached:
            D = extract_dominating_set(inst, res.best_S)
            assert len(D) <= k and is_dominating_set(graph, D)
