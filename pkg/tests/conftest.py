"""Shared graph builders for the test suite."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import strategies as st

from srcdetect.graph_core import Graph, random_tree
from srcdetect.spread import Snapshot


def tree_from_seed(n: int, seed: int) -> Graph:
    return random_tree(n, np.random.default_rng(seed))


def unicyclic_from_seed(n: int, seed: int) -> Graph:
    """Random tree plus one extra non-tree edge, giving exactly one cycle."""
    rng = np.random.default_rng(seed)
    g = random_tree(n, rng)
    missing = [(u, v) for u in range(n) for v in range(u + 1, n) if not g.has_edge(u, v)]
    u, v = missing[int(rng.integers(len(missing)))]
    return Graph.from_edges(n, [*g.edges(), (u, v)])


def compositions(total: int, parts: int):
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def multiplicity_counts(g: Graph) -> list[int]:
    """Orders from each start weighted by the product of infected-neighbour
    counts at each step; on a unicyclic graph this is the spanning-tree sum."""
    n = g.n
    adj = [tuple(g.adj[v]) for v in range(n)]
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def count(mask: int) -> int:
        if mask == full:
            return 1
        total = 0
        for u in range(n):
            if not mask >> u & 1:
                c = sum(1 for w in adj[u] if mask >> w & 1)
                if c:
                    total += c * count(mask | 1 << u)
        return total

    return [count(1 << v) for v in range(n)]


trees = st.builds(tree_from_seed, st.integers(1, 10), st.integers(0, 2**32 - 1))


def star_snapshot() -> Snapshot:
    """Hub 0 with leaves 1, 2, 3 inside an infinite 3-regular tree."""
    return Snapshot.regular(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)]), 3)


def g5_snapshot() -> Snapshot:
    """Five infected nodes of a finite 3-regular tree; node 4 is a leaf of
    the underlying tree hanging off node 1."""
    g = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 4)])
    return Snapshot.with_degrees(g, [3, 3, 3, 3, 1])


def g6_snapshot() -> Snapshot:
    """Triangle 0-1-2 with a pendant path 0-3-5 and a pendant 1-4 in a
    3-regular underlying graph."""
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 0), (5, 3), (4, 1)])
    return Snapshot.regular(g, 3)


def binary7() -> Graph:
    """Complete binary tree on 7 nodes rooted at 0."""
    return Graph.from_edges(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])


def spider(legs: list[int]) -> Graph:
    """Center 0 with paths of the given lengths attached."""
    edges = []
    nxt = 1
    for length in legs:
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            prev, nxt = nxt, nxt + 1
    return Graph.from_edges(nxt, edges)


def barbell(path_len: int) -> Graph:
    """Two copies of the 7-node balanced binary tree whose roots are joined
    by a path of ``path_len`` nodes."""
    left = list(binary7().edges())
    right = [(u + 7, v + 7) for u, v in left]
    path = list(range(14, 14 + path_len))
    edges = left + right + [(0, path[0])] + list(zip(path, path[1:])) + [(path[-1], 7)]
    return Graph.from_edges(14 + path_len, edges)


@pytest.fixture
def star4() -> Snapshot:
    return star_snapshot()


@pytest.fixture
def g5() -> Snapshot:
    return g5_snapshot()


@pytest.fixture
def g6() -> Snapshot:
    return g6_snapshot()


# -- acceptance reporting ---------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary and return the flag."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
