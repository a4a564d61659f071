"""Protection-node placement that limits expected cascade size.

A failure starts at a uniformly random node and takes over its whole
component once the protected nodes are removed. The expected outage is
``sum_i C_i^2 / N`` over the components ``C_i``; the integer numerator is the
objective every search here minimises.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .centrality import distance_centrality
from .graph_core import Graph, GraphError, bfs_tree

BRUTE_FORCE_CAP = 10**6


class VaccineError(ValueError):
    pass


def component_sizes(g: Graph, removed: Iterable[int]) -> list[int]:
    """Sizes of the connected components of ``g`` after deleting ``removed``."""
    gone = bytearray(g.n)
    for v in removed:
        if not 0 <= v < g.n:
            raise VaccineError(f"node {v} out of range")
        gone[v] = 1
    sizes = []
    for s in range(g.n):
        if gone[s]:
            continue
        gone[s] = 1
        stack = [s]
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for w in g.adj[u]:
                if not gone[w]:
                    gone[w] = 1
                    stack.append(w)
        sizes.append(size)
    return sizes


def objective(g: Graph, vp: Iterable[int]) -> int:
    """``sum_i C_i^2`` over components left when ``vp`` is removed."""
    return sum(c * c for c in component_sizes(g, vp))


def expected_outage(g: Graph, vp: Iterable[int]) -> Fraction:
    if g.n == 0:
        return Fraction(0)
    return Fraction(objective(g, vp), g.n)


@dataclass(frozen=True)
class ProtectionSet:
    nodes: tuple[int, ...]
    objective: int
    method: str

    def expected_outage(self, n: int) -> Fraction:
        return Fraction(self.objective, n)

    def to_json(self, n: int) -> dict:
        return {
            "k": len(self.nodes),
            "method": self.method,
            "protection_set": list(self.nodes),
            "objective": self.objective,
            "expected_outage": str(self.expected_outage(n)),
        }


# --------------------------------------------------------------------------
# Centroid decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CentroidTree:
    """Recursion tree of repeated centroid removal.

    ``parent[v]`` is the centroid whose removal produced the component ``v``
    was chosen from (``-1`` at the root), ``level[v]`` starts at 1 and
    ``vaccine_centrality[v]`` is the size of that component.
    """

    root: int
    parent: tuple[int, ...]
    level: tuple[int, ...]
    vaccine_centrality: tuple[int, ...]

    @property
    def height(self) -> int:
        return max(self.level)

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(u for u, p in enumerate(self.parent) if p == v)


def _component_centroid(g: Graph, nodes: list[int], alive: bytearray) -> int:
    """Lowest-id centroid of the tree component spanned by ``nodes``."""
    start = nodes[0]
    parent = {start: -1}
    order = [start]
    for u in order:
        for w in g.adj[u]:
            if alive[w] and w not in parent:
                parent[w] = u
                order.append(w)
    size = dict.fromkeys(order, 1)
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    total = len(order)
    best = None
    for u in order:
        heaviest = total - size[u]
        for w in g.adj[u]:
            if alive[w] and parent.get(w) == u:
                heaviest = max(heaviest, size[w])
        if 2 * heaviest <= total and (best is None or u < best):
            best = u
    return best


def centroid_decomposition(g: Graph) -> CentroidTree:
    if not g.is_tree:
        raise GraphError("centroid decomposition requires a tree")
    n = g.n
    alive = bytearray(b"\x01" * n)
    parent = [-1] * n
    level = [0] * n
    vc = [0] * n
    root = None
    # each task: (a node of the component, attaching centroid, level)
    tasks = [(0, -1, 1)]
    while tasks:
        seed, up, lv = tasks.pop()
        comp = [seed]
        seen = {seed}
        for u in comp:
            for w in g.adj[u]:
                if alive[w] and w not in seen:
                    seen.add(w)
                    comp.append(w)
        c = _component_centroid(g, comp, alive)
        parent[c] = up
        level[c] = lv
        vc[c] = len(comp)
        if root is None:
            root = c
        alive[c] = 0
        for w in g.adj[c]:
            if alive[w]:
                tasks.append((w, c, lv + 1))
    return CentroidTree(root, tuple(parent), tuple(level), tuple(vc))


def select_protection_set(g: Graph, k: int) -> ProtectionSet:
    """Top ``k`` nodes by vaccine centrality, ties by level then id."""
    if not 0 <= k <= g.n:
        raise VaccineError(f"k must lie in [0, {g.n}]")
    ct = centroid_decomposition(g)
    ranked = sorted(range(g.n), key=lambda v: (-ct.vaccine_centrality[v], ct.level[v], v))
    chosen = tuple(sorted(ranked[:k]))
    return ProtectionSet(chosen, objective(g, chosen), "vaccine_centrality")


def select_protection_set_general(g: Graph, k: int, root: int | None = None) -> ProtectionSet:
    """Vaccine-centrality selection on a BFS spanning tree of a general graph.

    The tree is rooted at ``root`` (default: lowest-id distance center); the
    reported objective is evaluated on ``g`` itself.
    """
    if root is None:
        root = min(distance_centrality(g).extremum)
    tree = bfs_tree(g, root)
    chosen = select_protection_set(tree, k).nodes
    return ProtectionSet(chosen, objective(g, chosen), "vaccine_centrality_bfs")


def brute_force_protection(g: Graph, k: int, cap: int = BRUTE_FORCE_CAP) -> ProtectionSet:
    """Exhaustive minimum, lexicographically smallest among optimal sets."""
    if not 0 <= k <= g.n:
        raise VaccineError(f"k must lie in [0, {g.n}]")
    if math.comb(g.n, k) > cap:
        raise VaccineError(f"C({g.n}, {k}) subsets exceed the cap {cap}")
    best = None
    for combo in itertools.combinations(range(g.n), k):
        val = objective(g, combo)
        if best is None or val < best[0]:
            best = (val, combo)
    return ProtectionSet(best[1], best[0], "brute_force")


def degree_heuristic_protection(g: Graph, k: int) -> ProtectionSet:
    if not 0 <= k <= g.n:
        raise VaccineError(f"k must lie in [0, {g.n}]")
    ranked = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    chosen = tuple(sorted(ranked[:k]))
    return ProtectionSet(chosen, objective(g, chosen), "degree")


@dataclass(frozen=True)
class BoundReport:
    """Single-node bound chain ``lower <= optimum <= upper``."""

    lower: int
    optimum: int
    upper: int
    centroid: int
    centroid_feasible: bool

    @property
    def holds(self) -> bool:
        return self.lower <= self.optimum <= self.upper and self.centroid_feasible

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "optimum": self.optimum,
            "upper": self.upper,
            "centroid": self.centroid,
            "centroid_feasible": self.centroid_feasible,
            "holds": self.holds,
        }


def bound_check(g: Graph) -> BoundReport:
    """Compare ``min max C^2``, ``min sum C^2`` and ``(N-1) min max C`` for ``k = 1``.

    The centroid is feasible when it attains the min-max component size,
    which solves both outer problems.
    """
    if not g.is_tree:
        raise GraphError("bound check requires a tree")
    biggest = []
    sums = []
    for v in range(g.n):
        sizes = component_sizes(g, (v,))
        biggest.append(max(sizes, default=0))
        sums.append(sum(c * c for c in sizes))
    min_max = min(biggest)
    centroid = centroid_decomposition(g).root
    return BoundReport(
        lower=min_max * min_max,
        optimum=min(sums),
        upper=(g.n - 1) * min_max,
        centroid=centroid,
        centroid_feasible=biggest[centroid] == min_max,
    )
