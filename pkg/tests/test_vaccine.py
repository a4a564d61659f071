import math
from fractions import Fraction as F

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import barbell, binary7, spider, tree_from_seed, unicyclic_from_seed
from srcdetect.centrality import betweenness_centrality, centroid_by_message_passing
from srcdetect.graph_core import Graph, GraphError, line, star
from srcdetect.vaccine import (
    VaccineError,
    bound_check,
    brute_force_protection,
    centroid_decomposition,
    component_sizes,
    degree_heuristic_protection,
    expected_outage,
    objective,
    select_protection_set,
    select_protection_set_general,
)


def thirteen_node_tree() -> Graph:
    """Node 0 splits the tree into parts of 1, 2, 3 and 6 nodes."""
    edges = [
        (0, 1),
        (0, 2), (2, 3),
        (0, 4), (4, 5), (5, 6),
        (0, 7), (7, 8), (8, 9), (9, 10), (10, 11), (11, 12),
    ]
    return Graph.from_edges(13, edges)


# -- objective --------------------------------------------------------------


def test_expected_outage_anchor():
    g = binary7()
    assert expected_outage(g, {0}) == F(18, 7)
    assert expected_outage(g, range(7)) == 0
    assert expected_outage(g, ()) == 7


def test_component_sizes_validation():
    assert sorted(component_sizes(line(5), [2])) == [2, 2]
    with pytest.raises(VaccineError):
        component_sizes(line(3), [5])


# -- centroid decomposition -------------------------------------------------


def test_line_decomposition():
    ct = centroid_decomposition(line(7))
    assert ct.root == 3 and ct.level[3] == 1
    assert set(ct.children(3)) == {1, 5}
    assert ct.level[1] == ct.level[5] == 2
    assert ct.vaccine_centrality[3] == 7


def test_thirteen_node_decomposition():
    g = thirteen_node_tree()
    ct = centroid_decomposition(g)
    assert ct.root == 0
    kids = {ct.vaccine_centrality[c] for c in ct.children(0)}
    assert kids == {1, 2, 3, 6}
    two_picks = select_protection_set(g, 2).nodes
    six_part = next(c for c in ct.children(0) if ct.vaccine_centrality[c] == 6)
    assert two_picks == tuple(sorted((0, six_part)))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_decomposition_structure(n, seed):
    g = tree_from_seed(n, seed)
    ct = centroid_decomposition(g)
    assert ct.root in centroid_by_message_passing(g).centroids
    assert ct.root == min(centroid_by_message_passing(g).centroids)
    assert ct.vaccine_centrality[ct.root] == n
    assert ct.height <= math.log2(n) + 1
    assert sorted(ct.parent).count(-1) == 1
    for v in range(n):
        kids = ct.children(v)
        assert sum(ct.vaccine_centrality[c] for c in kids) == ct.vaccine_centrality[v] - 1
        assert ct.vaccine_centrality[v] * 2 ** (ct.level[v] - 1) <= n


def test_decomposition_requires_tree():
    with pytest.raises(GraphError):
        centroid_decomposition(unicyclic_from_seed(6, 0))


# -- selection --------------------------------------------------------------


def test_line_selection():
    ps = select_protection_set(line(7), 1)
    assert ps.nodes == (3,) and ps.objective == 18
    assert brute_force_protection(line(5), 1).nodes == (2,)
    assert brute_force_protection(line(5), 1).objective == 8


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_selection_invariants(n, seed):
    g = tree_from_seed(n, seed)
    ct = centroid_decomposition(g)
    assert select_protection_set(g, 1).nodes == (ct.root,)
    prev = None
    for k in range(0, n + 1):
        ps = select_protection_set(g, k)
        assert len(ps.nodes) == k
        assert ps.objective == objective(g, ps.nodes)
        if prev is not None:
            assert ps.objective <= prev
        prev = ps.objective
    assert prev == 0
    assert degree_heuristic_protection(g, n).objective == 0


def test_selection_validation():
    with pytest.raises(VaccineError):
        select_protection_set(line(3), 4)
    with pytest.raises(VaccineError):
        degree_heuristic_protection(line(3), -1)
    with pytest.raises(VaccineError):
        brute_force_protection(line(40), 10)


@pytest.mark.parametrize("n", range(3, 12))
def test_ratio_bound_on_all_small_trees(n):
    for t in nx.nonisomorphic_trees(n):
        g = Graph.from_edges(n, t.edges())
        for k in range(1, min(3, n - 1) + 1):
            c = F(k, n)
            opt = brute_force_protection(g, k).objective
            alg = select_protection_set(g, k).objective
            assert alg <= opt * 2 / (c * (1 - c))


@pytest.mark.parametrize(
    "legs", [[1, 1, 1], [3, 1, 1], [2, 2, 5], [4, 4, 3, 1], [1, 2, 3, 4, 5], [6, 5, 1]]
)
def test_spider_center_is_optimal(legs):
    g = spider(legs)
    assert 0 in centroid_by_message_passing(g).centroids
    best = brute_force_protection(g, 1)
    assert objective(g, [0]) == best.objective
    assert select_protection_set(g, 1).nodes == (0,)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 14), st.integers(0, 2**32 - 1))
def test_single_node_optimum_is_betweenness_argmax(n, seed):
    g = tree_from_seed(n, seed)
    best = brute_force_protection(g, 1).objective
    top = betweenness_centrality(g).extremum
    assert all(objective(g, [v]) == best for v in top)


def test_star_and_degree():
    g = star(7)
    assert degree_heuristic_protection(g, 1).nodes == (0,)
    report = bound_check(g)
    assert (report.lower, report.optimum, report.upper) == (1, 6, 6)


def test_bound_chain_line():
    report = bound_check(line(7))
    assert (report.lower, report.optimum, report.upper) == (9, 18, 18)
    assert report.holds and report.centroid == 3
    assert report.to_json()["holds"] is True


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**32 - 1))
def test_bound_chain_random(n, seed):
    assert bound_check(tree_from_seed(n, seed)).holds


@pytest.mark.parametrize("path_len", [20, 40, 80])
def test_barbell_family(path_len):
    g = barbell(path_len)
    n = g.n
    for k in range(1, 7):
        assert select_protection_set(g, k).objective <= F(2 * n * n, k + 1)
    alg = select_protection_set(g, 1)
    deg = degree_heuristic_protection(g, 1)
    assert alg.objective < deg.objective
    assert alg.objective == brute_force_protection(g, 1).objective
    assert deg.nodes[0] < 14  # a node inside one of the balanced trees


def test_general_graph_entry():
    g = unicyclic_from_seed(12, 3)
    ps = select_protection_set_general(g, 2)
    assert len(ps.nodes) == 2
    assert ps.objective == objective(g, ps.nodes)
    other = select_protection_set_general(g, 2, root=5)
    assert other.objective == objective(g, other.nodes)


def test_report_json():
    doc = select_protection_set(line(7), 1).to_json(7)
    assert doc == {
        "k": 1,
        "method": "vaccine_centrality",
        "protection_set": [3],
        "objective": 18,
        "expected_outage": "18/7",
    }
