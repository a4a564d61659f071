"""Exact source likelihoods ``P(G_n | v)`` and their combinatorial decompositions.

The reference evaluator sums the per-order probability of the spreading
engine over every spreading order, organised as a dynamic programme over
connected infected sets so that no order is materialised. The closed forms
for lines, brooms and unicyclic snapshots are checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .centrality import count_orders_from
from .graph_core import Graph, GraphError, bfs_distances, broom, cycle_nodes, line, vertex_contraction
from .spread import (
    EnumerationCapExceeded,
    Snapshot,
    SpreadError,
    enumerate_spreading_orders,
    spreading_order_probability,
)

DP_NODE_CAP = 22
POSITION_NODE_CAP = 18
POSITION_SUBTREE_CAP = 10**6


@dataclass(frozen=True)
class LikelihoodTable:
    values: tuple[Fraction, ...]
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("empty likelihood table")
        if any(p < 0 for p in self.values):
            raise ValueError("likelihoods must be non-negative")

    @property
    def argmax(self) -> tuple[int, ...]:
        best = max(self.values)
        return tuple(i for i, p in enumerate(self.values) if p == best)

    def posterior(self) -> tuple[Fraction, ...]:
        total = sum(self.values)
        return tuple(p / total for p in self.values)

    def rows(self) -> list[tuple[int, int, int, Fraction]]:
        post = self.posterior()
        return [
            (lab, p.numerator, p.denominator, q)
            for lab, p, q in zip(self.labels, self.values, post)
        ]


def z(d: int, i: int) -> int:
    return (i - 1) * (d - 2)


# --------------------------------------------------------------------------
# Reference evaluator
# --------------------------------------------------------------------------


def _likelihood_dp(snap: Snapshot, start: int) -> Fraction:
    n = snap.n
    adj = snap.graph.adj
    deg = snap.degree
    nbr = [sum(1 << w for w in adj[v]) for v in range(n)]
    layer: dict[int, tuple[Fraction, int]] = {1 << start: (Fraction(1), deg[start])}
    for _ in range(n - 1):
        nxt: dict[int, list] = {}
        for mask, (val, boundary) in layer.items():
            frontier = 0
            m = mask
            while m:
                low = m & -m
                frontier |= nbr[low.bit_length() - 1]
                m ^= low
            frontier &= ~mask
            while frontier:
                low = frontier & -frontier
                x = low.bit_length() - 1
                frontier ^= low
                c = (nbr[x] & mask).bit_count()
                key = mask | low
                contrib = val * Fraction(c, boundary)
                slot = nxt.get(key)
                if slot is None:
                    nxt[key] = [contrib, boundary + deg[x] - 2 * c]
                else:
                    slot[0] += contrib
        layer = {k: (v[0], v[1]) for k, v in nxt.items()}
    (val, _), = layer.values()
    return val


def exact_source_likelihood(
    snap: Snapshot, cap: int = DP_NODE_CAP, method: str = "dp"
) -> LikelihoodTable:
    """``P(G_n | v)`` for every infected node ``v``.

    ``method="enumerate"`` sums explicitly over enumerated spreading orders and
    is limited by the enumeration caps; ``"dp"`` aggregates the same sum over
    infected sets and returns identical fractions.
    """
    if snap.n > cap:
        raise EnumerationCapExceeded(f"snapshot has {snap.n} nodes, cap is {cap}")
    if snap.n == 1:
        return LikelihoodTable((Fraction(1),), snap.labels)
    if method == "dp":
        values = tuple(_likelihood_dp(snap, v) for v in range(snap.n))
    elif method == "enumerate":
        values = tuple(
            sum(
                (spreading_order_probability(snap, o) for o in enumerate_spreading_orders(snap, v, cap=cap)),
                Fraction(0),
            )
            for v in range(snap.n)
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return LikelihoodTable(values, snap.labels)


# --------------------------------------------------------------------------
# Single end vertex
# --------------------------------------------------------------------------


def end_vertex_position_probability(d: int, n: int, k: int) -> Fraction:
    """Probability of one spreading order whose end vertex sits at position ``k``."""
    if d < 3:
        raise ValueError("d must be at least 3")
    if not 2 <= k <= n:
        raise ValueError(f"position k={k} outside 2..{n}")
    p = Fraction(1)
    for i in range(1, k):
        p /= d + z(d, i)
    for i in range(k - 1, n - 1):
        p /= d + z(d, i) - 1
    return p


def line_position_count(n: int, i: int, k: int) -> int:
    """Orders from ``v_i`` of a line ``v_1..v_n`` with end vertex ``v_n`` at position ``k``."""
    if i == n:
        return 1 if k == 1 else 0
    top = k - n + i - 1
    if k < 2 or top < 0 or top > k - 2:
        return 0
    return math.comb(k - 2, top)


def _connected_supersets(
    adj: Sequence[Sequence[int]], base: frozenset[int], size: int, forbidden: frozenset[int]
) -> Iterator[frozenset[int]]:
    """Connected node sets of exactly ``size`` nodes that contain ``base``."""
    if len(base) > size:
        return

    def rec(current: frozenset[int], ext: list[int], banned: set[int]) -> Iterator[frozenset[int]]:
        if len(current) == size:
            yield current
            return
        ext = list(ext)
        banned = set(banned)
        while ext:
            u = ext.pop()
            grown = current | {u}
            seen = set(ext)
            new_ext = list(ext)
            for w in adj[u]:
                if w not in grown and w not in banned and w not in seen:
                    new_ext.append(w)
                    seen.add(w)
            yield from rec(grown, new_ext, banned)
            banned.add(u)

    start_ext = sorted({w for u in base for w in adj[u]} - base - forbidden)
    yield from rec(base, start_ext, set(forbidden))


def position_count(snap: Snapshot, v: int, ve: int, k: int) -> int:
    """Number of spreading orders from ``v`` that infect end vertex ``ve`` at position ``k``.

    The first ``k - 1`` infected nodes form a subtree ``S`` holding ``v`` and
    the parent of ``ve``. Each such ``S`` contributes the orders of ``S``
    from ``v`` times the orders of the rest once ``S`` and ``ve`` are merged.
    """
    g = snap.graph
    if not g.is_tree:
        raise GraphError("position_count requires a tree snapshot")
    if not snap.end_vertices[ve] or g.degree(ve) > 1:
        raise SpreadError(f"node {ve} is not an end vertex")
    n = snap.n
    if v == ve:
        return 1 if k == 1 else 0
    dist = bfs_distances(g, ve)
    if k <= dist[v] or k > n:
        return 0
    if _is_line_with_end(g, ve):
        return line_position_count(n, n - dist[v], k)
    if n > POSITION_NODE_CAP:
        raise EnumerationCapExceeded(f"snapshot has {n} nodes, cap is {POSITION_NODE_CAP}")
    path = [v]
    while path[-1] != g.adj[ve][0]:
        here = path[-1]
        path.append(next(w for w in g.adj[here] if dist[w] == dist[here] - 1))
    total = 0
    seen = 0
    for sub in _connected_supersets(g.adj, frozenset(path), k - 1, frozenset([ve])):
        seen += 1
        if seen > POSITION_SUBTREE_CAP:
            raise EnumerationCapExceeded("too many candidate subtrees")
        inner, ids = g.induced(sorted(sub))
        p1 = count_orders_from(inner, ids.index(v))
        merged, _ = vertex_contraction(g, sub | {ve})
        p2 = count_orders_from(merged, 0)
        total += p1 * p2
    return total


def _is_line_with_end(g: Graph, ve: int) -> bool:
    return g.n <= 2 or (g.degree(ve) == 1 and max(g.degree(v) for v in range(g.n)) <= 2)


def line_snapshot(d: int, n: int) -> Snapshot:
    """Line ``v_1..v_n`` (ids ``0..n-1``) whose last node is the only end vertex."""
    return Snapshot.with_degrees(line(n), [d] * (n - 1) + [1])


def line_likelihood(d: int, n: int) -> LikelihoodTable:
    """Closed-form likelihoods on a line whose last node is the end vertex."""
    if d < 3 or n < 2:
        raise ValueError("line_likelihood needs d >= 3 and n >= 2")
    values = []
    for i in range(1, n):
        values.append(
            sum(
                (
                    line_position_count(n, i, k) * end_vertex_position_probability(d, n, k)
                    for k in range(n - i + 1, n + 1)
                ),
                Fraction(0),
            )
        )
    last = Fraction(1)
    for l in range(1, n):
        last /= z(d, l) + 1
    values.append(last)
    return LikelihoodTable(tuple(values), tuple(range(n)))


# --------------------------------------------------------------------------
# Broom: line v_1..v_2t with k end vertices hanging off v_2t
# --------------------------------------------------------------------------


def broom_snapshot(d: int, t: int, k_ends: int) -> Snapshot:
    g = broom(t, k_ends)
    return Snapshot.with_degrees(g, [d] * (2 * t) + [1] * k_ends)


def broom_likelihood(d: int, t: int, k_ends: int) -> LikelihoodTable:
    """Likelihood of each broom node as the source.

    Orders are grouped by the positions at which end vertices get infected:
    once ``e`` of them are infected the boundary weight after ``j`` infections
    is ``d + z(j) - (d - 1) e``. The grouping is evaluated by a dynamic
    programme over (infected line interval, number of infected end vertices).
    """
    if d < 3 or t < 1 or k_ends < 1 or k_ends > d - 1:
        raise ValueError("broom_likelihood needs d >= 3, t >= 1 and 1 <= k_ends <= d - 1")
    L = 2 * t
    hub = L - 1

    def boundary(a: int, b: int, e: int) -> int:
        j = b - a + 1 + e
        return d * (b - a + 1) + e - 2 * (j - 1)

    def solve(a0: int, b0: int, e0: int, init: Fraction) -> Fraction:
        layer = {(a0, b0, e0): init}
        for _ in range(L - (b0 - a0 + 1) + k_ends - e0):
            nxt: dict[tuple[int, int, int], Fraction] = {}
            for (a, b, e), val in layer.items():
                D = boundary(a, b, e)
                moves = []
                if a > 0:
                    moves.append(((a - 1, b, e), 1))
                if b < hub:
                    moves.append(((a, b + 1, e), 1))
                if b == hub and e < k_ends:
                    moves.append(((a, b, e + 1), k_ends - e))
                for key, weight in moves:
                    nxt[key] = nxt.get(key, Fraction(0)) + val * Fraction(weight, D)
            layer = nxt
        return layer[(0, hub, k_ends)]

    values = [solve(s, s, 0, Fraction(1)) for s in range(L)]
    # a pendant source infects the hub first, with probability one
    pendant = solve(hub, hub, 1, Fraction(1))
    values.extend([pendant] * k_ends)
    return LikelihoodTable(tuple(values), tuple(range(L + k_ends)))


# --------------------------------------------------------------------------
# One cycle
# --------------------------------------------------------------------------


def cycle_position_probability(d: int, n: int, k: int) -> Fraction:
    """Probability of one order whose last cycle vertex is infected at position ``k``.

    Before the cycle closes the infected set is a tree and the boundary weight
    after ``j`` infections is ``d + z(j)``; the closing vertex has two infected
    neighbours (the leading factor 2) and afterwards the extra induced edge
    lowers every boundary weight by 2.
    """
    if d < 3:
        raise ValueError("d must be at least 3")
    if not 3 <= k <= n:
        raise ValueError(f"position k={k} outside 3..{n}")
    p = Fraction(2)
    for j in range(1, k):
        p /= d + z(d, j)
    for j in range(k, n):
        p /= d + z(d, j) - 2
    return p


def cycle_position_counts(snap: Snapshot, v: int) -> dict[int, int]:
    """Map ``k`` to the number of spreading orders from ``v`` closing the cycle at ``k``."""
    g = snap.graph
    if not g.is_unicyclic:
        raise GraphError("snapshot is not unicyclic")
    n = g.n
    if n > DP_NODE_CAP:
        raise EnumerationCapExceeded(f"snapshot has {n} nodes, cap is {DP_NODE_CAP}")
    cyc_mask = sum(1 << c for c in cycle_nodes(g))
    nbr = [sum(1 << w for w in g.adj[u]) for u in range(n)]
    full = (1 << n) - 1

    def frontier(mask: int) -> int:
        f = 0
        m = mask
        while m:
            low = m & -m
            f |= nbr[low.bit_length() - 1]
            m ^= low
        return f & ~mask

    # forward: orders reaching each set; record the sets at which the cycle closes
    forward = {1 << v: 1}
    closing: dict[int, int] = {}
    layers = [forward]
    for _ in range(n - 1):
        nxt: dict[int, int] = {}
        for mask, cnt in layers[-1].items():
            f = frontier(mask)
            while f:
                low = f & -f
                f ^= low
                key = mask | low
                nxt[key] = nxt.get(key, 0) + cnt
                if low & cyc_mask and (key & cyc_mask) == cyc_mask and (mask & cyc_mask) != cyc_mask:
                    closing[key] = closing.get(key, 0) + cnt
        layers.append(nxt)
    # backward: number of ways to finish from each set
    finish = {full: 1}
    for depth in range(n - 2, -1, -1):
        for mask in layers[depth]:
            total = 0
            f = frontier(mask)
            while f:
                low = f & -f
                f ^= low
                total += finish.get(mask | low, 0)
            finish[mask] = total
    counts: dict[int, int] = {}
    for mask, cnt in closing.items():
        k = mask.bit_count()
        counts[k] = counts.get(k, 0) + cnt * finish[mask]
    return dict(sorted(counts.items()))


def pseudo_tree_likelihood(snap: Snapshot) -> LikelihoodTable:
    """Likelihoods on a unicyclic snapshot over a ``d``-regular graph.

    ``P(G_n | v) = sum_k m_v(k) * P(k)`` where ``m_v(k)`` counts orders closing
    the cycle at position ``k`` and ``P(k)`` is :func:`cycle_position_probability`.
    """
    if not snap.graph.is_unicyclic:
        raise GraphError("snapshot is not unicyclic")
    d = snap.degree[0]
    if any(x != d for x in snap.degree):
        raise GraphError("pseudo_tree_likelihood needs a d-regular underlying graph")
    n = snap.n
    values = []
    for v in range(n):
        counts = cycle_position_counts(snap, v)
        values.append(
            sum((m * cycle_position_probability(d, n, k) for k, m in counts.items()), Fraction(0))
        )
    return LikelihoodTable(tuple(values), snap.labels)
