"""SI spreading: snapshots, simulation, spreading orders and their probabilities.

At every discrete step a susceptible node is infected with probability
proportional to its number of infected neighbours. Equivalently, a uniformly
random edge between the infected set and the rest of the graph is crossed.
The probability engine therefore only needs the induced snapshot and the
underlying degree of each infected node: the boundary weight after infecting
a set ``S`` is ``sum(deg(S)) - 2 * |E(S)|``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Protocol, Sequence

import numpy as np

from .graph_core import Graph, GraphError

ENUMERATION_NODE_CAP = 12
ENUMERATION_ORDER_CAP = 10**7


class SpreadError(ValueError):
    """Invalid snapshot, order or simulation request."""


class EnumerationCapExceeded(SpreadError):
    """The requested exhaustive computation is larger than the configured cap."""


class Underlying(Protocol):
    def neighbors(self, v: int) -> Sequence[int]: ...

    def degree(self, v: int) -> int: ...


# --------------------------------------------------------------------------
# Snapshots
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    """Observed infected subgraph.

    ``graph`` is the induced subgraph on local ids ``0..n-1``; ``labels`` maps
    local ids back to node ids of the underlying graph, and ``degree`` holds
    each infected node's degree in the underlying graph.
    """

    graph: Graph
    degree: tuple[int, ...]
    labels: tuple[int, ...]
    source: int | None = None
    order: tuple[int, ...] | None = field(default=None, compare=False)
    trace: tuple[tuple[int, int], ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        n = self.graph.n
        if len(self.degree) != n or len(self.labels) != n:
            raise SpreadError("degree and labels must cover every snapshot node")
        if n and not self.graph.is_connected:
            raise SpreadError("infected nodes must induce a connected subgraph")
        for v in range(n):
            if self.degree[v] < self.graph.degree(v):
                raise SpreadError(f"node {v}: underlying degree below induced degree")
        if self.source is not None and not 0 <= self.source < n:
            raise SpreadError("source outside the snapshot")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def end_vertices(self) -> tuple[bool, ...]:
        return tuple(d == 1 for d in self.degree)

    @cached_property
    def index(self) -> dict[int, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @classmethod
    def regular(cls, graph: Graph, d: int, source: int | None = None) -> "Snapshot":
        """Snapshot whose underlying graph is an infinite ``d``-regular tree."""
        return cls(graph, (d,) * graph.n, tuple(range(graph.n)), source)

    @classmethod
    def with_degrees(
        cls, graph: Graph, degree: Sequence[int], source: int | None = None
    ) -> "Snapshot":
        return cls(graph, tuple(degree), tuple(range(graph.n)), source)

    @classmethod
    def from_underlying(
        cls, g: Underlying, nodes: Sequence[int], source: int | None = None
    ) -> "Snapshot":
        """Induced snapshot of ``nodes`` inside underlying graph ``g``."""
        labels = tuple(sorted(set(nodes)))
        index = {lab: i for i, lab in enumerate(labels)}
        edges = [
            (index[u], index[w])
            for u in labels
            for w in g.neighbors(u)
            if w in index and u < w
        ]
        graph = Graph.from_edges(len(labels), edges)
        local = None if source is None else index[source]
        return cls(graph, tuple(g.degree(u) for u in labels), labels, local)

    def to_json(self) -> dict:
        out = {
            "nodes": list(self.labels),
            "edges": [[self.labels[u], self.labels[v]] for u, v in self.graph.edges()],
            "underlying_degree": {str(lab): d for lab, d in zip(self.labels, self.degree)},
            "end_vertices": [lab for lab, e in zip(self.labels, self.end_vertices) if e],
        }
        if self.source is not None:
            out["source"] = self.labels[self.source]
        if self.order is not None:
            out["order"] = [self.labels[v] for v in self.order]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Snapshot":
        labels = tuple(int(x) for x in data["nodes"])
        if len(set(labels)) != len(labels):
            raise SpreadError("duplicate node in snapshot")
        index = {lab: i for i, lab in enumerate(labels)}
        try:
            edges = [(index[int(u)], index[int(v)]) for u, v in data.get("edges", [])]
        except KeyError as exc:
            raise SpreadError(f"edge endpoint {exc.args[0]} is not a snapshot node") from None
        degmap = {int(k): int(v) for k, v in data["underlying_degree"].items()}
        degree = tuple(degmap[lab] for lab in labels)
        graph = Graph.from_edges(len(labels), edges)
        src = data.get("source")
        order = data.get("order")
        snap = cls(
            graph,
            degree,
            labels,
            None if src is None else index[int(src)],
            None if order is None else tuple(index[int(x)] for x in order),
        )
        declared = data.get("end_vertices")
        if declared is not None:
            flagged = {lab for lab, e in zip(labels, snap.end_vertices) if e}
            if {int(x) for x in declared} != flagged:
                raise SpreadError("end_vertices disagree with underlying degrees")
        return snap

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class StopRule:
    target_size: int
    max_end_vertex_fraction: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.target_size < 1:
            raise SpreadError("target_size must be positive")
        if not 0 < self.max_end_vertex_fraction <= 1:
            raise SpreadError("max_end_vertex_fraction must lie in (0, 1]")


class LazyRegularTree:
    """Infinite ``d``-regular tree materialised on demand.

    Node 0 is the root. A node's children are allocated the first time its
    neighbourhood is requested, so ids depend only on the expansion order.
    """

    def __init__(self, d: int) -> None:
        if d < 2:
            raise SpreadError("an infinite regular tree needs d >= 2")
        self.d = d
        self._parent = [-1]
        self._first_child = [-1]

    def degree(self, v: int) -> int:
        return self.d

    def neighbors(self, v: int) -> list[int]:
        first = self._first_child[v]
        fan = self.d if v == 0 else self.d - 1
        if first < 0:
            first = len(self._parent)
            self._first_child[v] = first
            self._parent.extend([v] * fan)
            self._first_child.extend([-1] * fan)
        kids = list(range(first, first + fan))
        return kids if v == 0 else [self._parent[v], *kids]

    def root_branch(self, v: int) -> int:
        """Index ``0..d-1`` of the root's branch containing ``v`` (``v != 0``)."""
        while self._parent[v] != 0:
            v = self._parent[v]
        return v - self._first_child[0]


# --------------------------------------------------------------------------
# Simulation
# --------------------------------------------------------------------------


def simulate_si(
    g: Underlying,
    source: int,
    rule: StopRule,
    seed: int | np.random.SeedSequence,
) -> Snapshot:
    """Run the discrete SI process from ``source`` until the stop rule fires.

    One uniform variate is pre-drawn per step, so step ``k`` always consumes
    variate ``k`` of the stream seeded by ``seed``.
    """
    finite = isinstance(g, Graph)
    if finite:
        if not 0 <= source < g.n:
            raise SpreadError(f"source {source} out of range")
        if not g.is_connected:
            raise SpreadError("underlying graph is disconnected")
        if rule.target_size > g.n:
            raise SpreadError("target_size exceeds the graph size")
    target = rule.target_size
    uniforms = np.random.default_rng(seed).random(target).tolist()
    end_limit = rule.max_end_vertex_fraction * target

    infected = {source}
    order = [source]
    trace: list[tuple[int, int]] = []
    slots: list[int] = []
    where: dict[int, list[int]] = {}
    ends = 1 if g.degree(source) == 1 else 0

    def expose(x: int) -> None:
        for w in g.neighbors(x):
            if w not in infected:
                where.setdefault(w, []).append(len(slots))
                slots.append(w)

    expose(source)
    step = 1
    while len(order) < target and slots and ends < end_limit:
        x = slots[int(uniforms[step] * len(slots))]
        positions = where.pop(x)
        trace.append((len(positions), len(slots)))
        for pos in sorted(positions, reverse=True):
            last = len(slots) - 1
            if pos != last:
                moved = slots[last]
                slots[pos] = moved
                lst = where[moved]
                lst[lst.index(last)] = pos
            slots.pop()
        infected.add(x)
        order.append(x)
        if g.degree(x) == 1:
            ends += 1
        expose(x)
        step += 1

    snap = Snapshot.from_underlying(g, order, source)
    index = snap.index
    return Snapshot(
        snap.graph,
        snap.degree,
        snap.labels,
        snap.source,
        tuple(index[v] for v in order),
        tuple(trace),
    )


def trajectory_law(g: Underlying, source: int, size: int) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Every infection sequence of length ``size`` with its exact probability.

    This walks the same step rule as :func:`simulate_si` exhaustively, which
    makes it an exact reference for the law of small simulated snapshots.
    """
    infected = [source]
    inset = {source}

    def weights() -> tuple[dict[int, int], int]:
        w: dict[int, int] = {}
        for u in infected:
            for x in g.neighbors(u):
                if x not in inset:
                    w[x] = w.get(x, 0) + 1
        return w, sum(w.values())

    def rec(prob: Fraction) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        if len(infected) == size:
            yield tuple(infected), prob
            return
        w, total = weights()
        if total == 0:
            yield tuple(infected), prob
            return
        for x in sorted(w):
            infected.append(x)
            inset.add(x)
            yield from rec(prob * Fraction(w[x], total))
            inset.discard(x)
            infected.pop()

    yield from rec(Fraction(1))


# --------------------------------------------------------------------------
# Spreading orders
# --------------------------------------------------------------------------


def is_spreading_order(snap: Snapshot, order: Sequence[int]) -> bool:
    if sorted(order) != list(range(snap.n)):
        return False
    seen = {order[0]}
    for x in order[1:]:
        if not any(w in seen for w in snap.graph.adj[x]):
            return False
        seen.add(x)
    return True


def enumerate_spreading_orders(
    snap: Snapshot,
    start: int,
    cap: int = ENUMERATION_NODE_CAP,
    max_orders: int = ENUMERATION_ORDER_CAP,
) -> list[tuple[int, ...]]:
    """All permitted permutations starting at ``start``, in lexicographic order."""
    if not 0 <= start < snap.n:
        raise SpreadError(f"start {start} outside the snapshot")
    if snap.n > cap:
        raise EnumerationCapExceeded(f"snapshot has {snap.n} nodes, cap is {cap}")
    adj = snap.graph.adj
    n = snap.n
    out: list[tuple[int, ...]] = []
    seq = [start]
    used = [False] * n
    used[start] = True
    reach = [0] * n
    for w in adj[start]:
        reach[w] += 1

    def rec() -> None:
        if len(seq) == n:
            if len(out) >= max_orders:
                raise EnumerationCapExceeded(f"more than {max_orders} spreading orders")
            out.append(tuple(seq))
            return
        for x in range(n):
            if not used[x] and reach[x]:
                used[x] = True
                seq.append(x)
                for w in adj[x]:
                    reach[w] += 1
                rec()
                for w in adj[x]:
                    reach[w] -= 1
                seq.pop()
                used[x] = False

    rec()
    return out


def spreading_order_probability(snap: Snapshot, order: Sequence[int]) -> Fraction:
    """Exact probability that the process from ``order[0]`` follows ``order``."""
    if not is_spreading_order(snap, order):
        raise SpreadError("not a valid spreading order for this snapshot")
    adj = snap.graph.adj
    deg = snap.degree
    inset = {order[0]}
    boundary = deg[order[0]]
    prob = Fraction(1)
    for x in order[1:]:
        c = sum(1 for w in adj[x] if w in inset)
        prob *= Fraction(c, boundary)
        boundary += deg[x] - 2 * c
        inset.add(x)
    return prob


def branch_composition(g: Underlying, source: int, infected: Sequence[int]) -> tuple[int, ...]:
    """Infected-node counts in each branch of ``source`` in a tree ``g``.

    Branches follow the order of ``g.neighbors(source)``, zeros included.
    """
    inset = set(infected)
    counts = []
    for first in g.neighbors(source):
        if first not in inset:
            counts.append(0)
            continue
        seen = {source, first}
        stack = [first]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if w in inset and w not in seen:
                    seen.add(w)
                    stack.append(w)
        counts.append(len(seen) - 1)
    return tuple(counts)


def require_tree(snap: Snapshot) -> None:
    if not snap.graph.is_tree:
        raise GraphError("operation requires a tree snapshot")
