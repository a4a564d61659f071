import json
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tree_from_seed, unicyclic_from_seed
from srcdetect.asymptotics import UrnSpec, urn_marginal_pmf
from srcdetect.centrality import rumor_centrality_tree
from srcdetect.graph_core import Graph, circulant, line, star
from srcdetect.likelihood import exact_source_likelihood
from srcdetect.spread import (
    EnumerationCapExceeded,
    LazyRegularTree,
    Snapshot,
    SpreadError,
    StopRule,
    branch_composition,
    enumerate_spreading_orders,
    is_spreading_order,
    simulate_si,
    spreading_order_probability,
    trajectory_law,
)

# -- simulation -------------------------------------------------------------


def test_single_edge_is_deterministic():
    g = line(2)
    for seed in range(5):
        snap = simulate_si(g, 0, StopRule(2), seed)
        assert snap.order == (0, 1) and snap.labels == (0, 1)


def test_triangle_trace_records_shared_neighbour_weight():
    tri = circulant(3, [1])
    snap = simulate_si(tri, 0, StopRule(3), 1)
    assert snap.trace[0] == (1, 2)
    assert snap.trace[1] == (2, 2)


def test_triangle_second_node_law():
    law = Counter()
    for order, p in trajectory_law(circulant(3, [1]), 0, 3):
        law[order[1]] += p
    assert law == {1: Fraction(1, 2), 2: Fraction(1, 2)}


def test_simulation_is_reproducible():
    g = tree_from_seed(60, 2)
    a = simulate_si(g, 5, StopRule(30), 99)
    b = simulate_si(g, 5, StopRule(30), 99)
    assert a.order == b.order and a.trace == b.trace


def test_simulation_errors():
    with pytest.raises(SpreadError):
        simulate_si(line(3), 7, StopRule(2), 0)
    with pytest.raises(SpreadError):
        simulate_si(Graph.from_edges(3, [(0, 1)]), 0, StopRule(2), 0)
    with pytest.raises(SpreadError):
        simulate_si(line(3), 0, StopRule(4), 0)
    with pytest.raises(SpreadError):
        StopRule(0)
    with pytest.raises(SpreadError):
        StopRule(3, Fraction(0))


def test_end_vertex_stop_rule():
    snap = simulate_si(star(10), 0, StopRule(9, Fraction(1, 3)), 4)
    # leaves of the star are end vertices; the spread halts once 3 of 9 are in
    assert snap.n == 4 and sum(snap.end_vertices) == 3


def test_snapshot_is_connected_induced_subgraph():
    g = tree_from_seed(200, 8)
    snap = simulate_si(g, 3, StopRule(50), 8)
    assert snap.graph.is_connected and snap.n == 50
    for v in range(snap.n):
        assert snap.degree[v] == g.degree(snap.labels[v])
        assert snap.degree[v] >= snap.graph.degree(v)
    assert is_spreading_order(snap, snap.order)


@pytest.mark.parametrize("size", [3, 4, 5])
def test_trajectory_law_sums_to_one(size):
    g = unicyclic_from_seed(8, size)
    assert sum(p for _, p in trajectory_law(g, 0, size)) == 1


def test_simulation_matches_trajectory_law():
    g = Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4)])
    exact = {order: p for order, p in trajectory_law(g, 0, 4)}
    runs = 20_000
    counts = Counter()
    for s in range(runs):
        snap = simulate_si(g, 0, StopRule(4), s)
        counts[tuple(snap.labels[v] for v in snap.order)] += 1
    tv = sum(abs(counts.get(o, 0) / runs - float(p)) for o, p in exact.items()) / 2
    assert tv < 0.02


def test_branch_marginal_matches_urn_marginal():
    d, n, runs = 3, 8, 100_000
    counts = Counter()
    for s in range(runs):
        tree = LazyRegularTree(d)
        snap = simulate_si(tree, 0, StopRule(n), s)
        counts[branch_composition(tree, 0, snap.labels)[0]] += 1
    pmf = urn_marginal_pmf(UrnSpec.spreading(d, n), 0)
    tv = sum(abs(counts.get(a, 0) / runs - float(p)) for a, p in enumerate(pmf)) / 2
    assert tv < 0.02


# -- spreading orders -------------------------------------------------------


def test_line4_orders_from_second_node():
    snap = Snapshot.regular(line(4), 3)
    assert enumerate_spreading_orders(snap, 1) == [(1, 0, 2, 3), (1, 2, 0, 3), (1, 2, 3, 0)]


@pytest.mark.parametrize("n", range(1, 9))
def test_line_order_counts_are_binomial(n):
    snap = Snapshot.regular(line(n), 3)
    for i in range(1, n + 1):
        assert len(enumerate_spreading_orders(snap, i - 1)) == math.comb(n - 1, n - i)


def test_star_hub_orders():
    assert len(enumerate_spreading_orders(Snapshot.regular(star(4), 3), 0)) == 6


def test_enumeration_caps():
    snap = Snapshot.regular(line(13), 3)
    with pytest.raises(EnumerationCapExceeded):
        enumerate_spreading_orders(snap, 0)
    with pytest.raises(EnumerationCapExceeded):
        enumerate_spreading_orders(Snapshot.regular(star(8), 7), 0, max_orders=100)


def test_enumeration_is_lexicographic():
    snap = Snapshot.regular(tree_from_seed(7, 4), 4)
    orders = enumerate_spreading_orders(snap, 2)
    assert orders == sorted(orders)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_order_count_equals_rumor_centrality(n, seed):
    g = tree_from_seed(n, seed)
    snap = Snapshot.regular(g, max(3, *(g.degree(v) for v in range(n))))
    table = rumor_centrality_tree(g)
    for v in range(n):
        assert len(enumerate_spreading_orders(snap, v)) == table.scores[v]


# -- order probabilities ----------------------------------------------------


def test_star_order_probability(star4):
    assert spreading_order_probability(star4, (3, 0, 1, 2)) == Fraction(1, 60)
    total = sum(spreading_order_probability(star4, o) for o in enumerate_spreading_orders(star4, 3))
    assert total == Fraction(1, 30)


def test_end_vertex_order_probability(g5):
    assert spreading_order_probability(g5, (0, 1, 4, 2, 3)) == Fraction(1, 144)
    # the same order without the underlying leaf is slower
    free = Snapshot.regular(g5.graph, 3)
    assert spreading_order_probability(free, (0, 1, 4, 2, 3)) == Fraction(1, 360)


def test_cycle_order_probability(g6):
    assert spreading_order_probability(g6, (3, 0, 1, 2, 4, 5)) == Fraction(2, 1200)


def test_invalid_order_rejected(g5):
    with pytest.raises(SpreadError):
        spreading_order_probability(g5, (2, 3, 0, 1, 4))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(3, 5), st.integers(0, 2**32 - 1))
def test_orders_equiprobable_on_infinite_regular_tree(n, d, seed):
    g = tree_from_seed(n, seed)
    if max(g.degree(v) for v in range(n)) > d:
        return
    snap = Snapshot.regular(g, d)
    for v in range(n):
        probs = {spreading_order_probability(snap, o) for o in enumerate_spreading_orders(snap, v)}
        assert len(probs) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.booleans())
def test_order_sum_reproduces_exact_likelihood(n, seed, cyclic):
    g = unicyclic_from_seed(n, seed) if cyclic and n >= 3 else tree_from_seed(n, seed)
    rng = np.random.default_rng(seed)
    degree = [g.degree(v) + int(rng.integers(0, 3)) for v in range(n)]
    degree = [1 if x == 1 and rng.random() < 0.5 else max(x, 2) for x in degree]
    snap = Snapshot.with_degrees(g, [max(a, g.degree(v)) for v, a in enumerate(degree)])
    table = exact_source_likelihood(snap)
    for v in range(n):
        total = sum(
            (spreading_order_probability(snap, o) for o in enumerate_spreading_orders(snap, v)),
            Fraction(0),
        )
        assert total == table.values[v]


# -- snapshot I/O -----------------------------------------------------------


def test_snapshot_json_roundtrip():
    g = tree_from_seed(40, 1)
    snap = simulate_si(g, 0, StopRule(12), 5)
    data = json.loads(snap.dumps())
    assert set(data) == {"nodes", "edges", "underlying_degree", "end_vertices", "source", "order"}
    back = Snapshot.from_json(data)
    assert back == snap and back.order == snap.order


def test_snapshot_validation():
    with pytest.raises(SpreadError):
        Snapshot.with_degrees(Graph.from_edges(3, [(0, 1)]), [2, 2, 2])
    with pytest.raises(SpreadError):
        Snapshot.with_degrees(line(3), [1, 1, 1])
    data = Snapshot.with_degrees(line(2), [1, 3]).to_json()
    data["end_vertices"] = []
    with pytest.raises(SpreadError):
        Snapshot.from_json(data)


def test_lazy_tree_structure():
    t = LazyRegularTree(3)
    assert len(t.neighbors(0)) == 3
    kid = t.neighbors(0)[0]
    assert len(t.neighbors(kid)) == 3 and 0 in t.neighbors(kid)
    assert t.root_branch(t.neighbors(kid)[1]) == 0
