"""Node scores: distance, betweenness, centroid, rumor and epidemic centrality,
Jordan center, statistical distance centrality and the rumor Markov chain."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .graph_core import (
    CycleSize,
    Graph,
    GraphError,
    bfs_distances,
    cycle_nodes,
    minimum_chordless_cycle_size,
    rooted_view,
    spanning_trees_unicyclic,
)

Regime = Literal["exact_rational", "big_integer", "log_real", "real"]
BIG_INTEGER_LIMIT = 150
LOG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ScoreTable:
    """Per-node scores with the set of extremal nodes.

    ``kind`` says whether the extremum is the maximum or the minimum. In the
    ``log_real`` and ``real`` regimes scores within ``tol`` of the extremum
    count as tied.
    """

    scores: tuple
    regime: Regime
    kind: Literal["max", "min"]
    tol: float = LOG_TOLERANCE

    @property
    def extremum(self) -> tuple[int, ...]:
        if not self.scores:
            raise ValueError("empty score table")
        if self.kind == "max":
            best = max(self.scores)
            if self.regime in ("log_real", "real"):
                return tuple(i for i, s in enumerate(self.scores) if s >= best - self.tol)
        else:
            best = min(self.scores)
            if self.regime in ("log_real", "real"):
                return tuple(i for i, s in enumerate(self.scores) if s <= best + self.tol)
        return tuple(i for i, s in enumerate(self.scores) if s == best)

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, v: int):
        return self.scores[v]


def _require_connected(g: Graph) -> None:
    if not g.is_connected:
        raise GraphError("graph is disconnected")


def _require_tree(g: Graph) -> None:
    if not g.is_tree:
        raise GraphError("operation requires a tree")


# --------------------------------------------------------------------------
# Classical centralities
# --------------------------------------------------------------------------


def distance_centrality(g: Graph) -> ScoreTable:
    """Sum of hop distances to every other node (minimised by distance centers)."""
    _require_connected(g)
    if g.is_tree and g.n > 1:
        rv = rooted_view(g, 0)
        n = g.n
        scores = [0] * n
        scores[0] = sum(bfs_distances(g, 0))
        for u in rv.order[1:]:
            s = rv.subtree_size[u]
            scores[u] = scores[rv.parent[u]] - s + (n - s)
    else:
        scores = [sum(bfs_distances(g, v)) for v in range(g.n)]
    return ScoreTable(tuple(scores), "big_integer", "min")


def betweenness_centrality(g: Graph, exact_limit: int = 1000) -> ScoreTable:
    """Shortest-path betweenness over unordered pairs (Brandes accumulation)."""
    _require_connected(g)
    exact = g.n <= exact_limit
    zero = Fraction(0) if exact else 0.0
    bc = [zero] * g.n
    for s in range(g.n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(g.n)]
        sigma = [0] * g.n
        sigma[s] = 1
        dist = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in g.adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [zero] * g.n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                if exact:
                    delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
                else:
                    delta[v] += sigma[v] / sigma[w] * (1 + delta[w])
            if w != s:
                bc[w] += delta[w]
    scores = tuple(b / 2 for b in bc)
    return ScoreTable(scores, "exact_rational" if exact else "real", "max")


def jordan_center(g: Graph) -> tuple[int, ...]:
    """Nodes of minimum eccentricity."""
    return eccentricity(g).extremum


def eccentricity(g: Graph) -> ScoreTable:
    _require_connected(g)
    return ScoreTable(tuple(max(bfs_distances(g, v)) for v in range(g.n)), "big_integer", "min")


def degree_centrality(g: Graph) -> ScoreTable:
    return ScoreTable(tuple(g.degree(v) for v in range(g.n)), "big_integer", "max")


# --------------------------------------------------------------------------
# Centroid by message passing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Centroid:
    weights: ScoreTable
    messages: dict[tuple[int, int], int]
    centroids: tuple[int, ...]

    def diff(self, i: int, j: int) -> int:
        """``|2 M(i->j) - N|`` for an edge ``i - j``."""
        return abs(2 * self.messages[(i, j)] - self.weights_n)

    @property
    def weights_n(self) -> int:
        return len(self.weights)


def centroid_by_message_passing(g: Graph) -> Centroid:
    """Branch weights and subtree-size messages from one leaf-to-root sweep.

    ``messages[(i, j)]`` is the number of nodes on ``i``'s side of edge
    ``i - j``; the two directions of an edge always sum to ``N``. The centroid
    is reached by walking from the root into any branch holding more than
    half of the nodes.
    """
    _require_tree(g)
    n = g.n
    rv = rooted_view(g, 0)
    messages: dict[tuple[int, int], int] = {}
    for u in rv.order[1:]:
        p = rv.parent[u]
        messages[(u, p)] = rv.subtree_size[u]
        messages[(p, u)] = n - rv.subtree_size[u]
    weights = tuple(max((messages[(w, v)] for w in g.adj[v]), default=0) for v in range(n))
    v = 0
    while True:
        heavy = [w for w in g.adj[v] if 2 * messages[(w, v)] > n]
        if not heavy:
            break
        v = heavy[0]
    cents = [v] + [w for w in g.adj[v] if 2 * messages[(w, v)] == n]
    return Centroid(ScoreTable(weights, "big_integer", "min"), messages, tuple(sorted(cents)))


# --------------------------------------------------------------------------
# Rumor centrality
# --------------------------------------------------------------------------


def count_orders_from(tree: Graph, root: int) -> int:
    """Number of spreading orders of ``tree`` starting at ``root``."""
    if tree.n == 1:
        return 1
    rv = rooted_view(tree, root)
    denom = 1
    for u in rv.order[1:]:
        denom *= rv.subtree_size[u]
    return math.factorial(tree.n - 1) // denom


def rumor_centrality_tree(g: Graph, regime: Regime | None = None) -> ScoreTable:
    """``R(v) = (n-1)! / prod_{u != v} t_u^v`` for every node of a tree.

    Exact integers up to 150 nodes, natural logarithms above, unless a regime
    is forced.
    """
    _require_tree(g)
    n = g.n
    if regime is None:
        regime = "big_integer" if n <= BIG_INTEGER_LIMIT else "log_real"
    rv = rooted_view(g, 0)
    size = rv.subtree_size
    if regime == "big_integer":
        scores: list = [0] * n
        scores[0] = count_orders_from(g, 0)
        for u in rv.order[1:]:
            scores[u] = scores[rv.parent[u]] * size[u] // (n - size[u])
    elif regime == "log_real":
        scores = [0.0] * n
        scores[0] = math.lgamma(n) - math.fsum(math.log(size[u]) for u in rv.order[1:])
        for u in rv.order[1:]:
            scores[u] = scores[rv.parent[u]] + math.log(size[u]) - math.log(n - size[u])
    else:
        raise ValueError(f"unsupported regime {regime!r}")
    return ScoreTable(tuple(scores), regime, "max")


def rumor_center(g: Graph) -> tuple[int, ...]:
    """Nodes whose every branch holds at most half of the nodes."""
    _require_tree(g)
    if g.n == 1:
        return (0,)
    return tuple(
        v
        for v, w in enumerate(centroid_by_message_passing(g).weights.scores)
        if 2 * w <= g.n
    )


def root_rumor_centrality(tree: Graph, root: int, regime: Regime = "big_integer"):
    """Rumor centrality of ``root`` alone (used for candidate-rooted BFS trees)."""
    if regime == "big_integer":
        return count_orders_from(tree, root)
    rv = rooted_view(tree, root)
    return math.lgamma(tree.n) - math.fsum(math.log(rv.subtree_size[u]) for u in rv.order[1:])


# --------------------------------------------------------------------------
# Epidemic centrality on unicyclic graphs
# --------------------------------------------------------------------------


def _hanging_trees(g: Graph, cyc: Sequence[int]) -> tuple[list[int], list[int], list[int], list[int]]:
    """Parent pointers and subtree sizes of the trees hanging off the cycle."""
    on_cycle = set(cyc)
    parent = [-1] * g.n
    owner = [-1] * g.n
    order: list[int] = []
    for c in cyc:
        owner[c] = c
        order.append(c)
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in g.adj[u]:
            if w not in on_cycle and owner[w] < 0:
                owner[w] = owner[u]
                parent[w] = u
                order.append(w)
    size = [1] * g.n
    for u in reversed(order):
        if parent[u] >= 0:
            size[parent[u]] += size[u]
    return parent, owner, size, order


def epidemic_centrality_unicyclic(g: Graph, method: str = "fast") -> ScoreTable:
    """``|M(v, G)|`` summed over the spanning trees of a unicyclic graph.

    ``method="spanning"`` sums tree rumor centralities over the ``h`` spanning
    trees. ``"fast"`` fills the cycle-vertex by spanning-tree table from arc
    sums of the hanging-tree sizes and then propagates off the cycle with the
    neighbour ratio ``t_u / (n - t_u)``, which is the same in every spanning
    tree.
    """
    if not g.is_unicyclic:
        raise GraphError("graph is not unicyclic")
    n = g.n
    if method == "spanning":
        total = [0] * n
        for tree in spanning_trees_unicyclic(g):
            for v, r in enumerate(rumor_centrality_tree(tree, "big_integer").scores):
                total[v] += r
        return ScoreTable(tuple(total), "big_integer", "max")
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")

    cyc = cycle_nodes(g)
    h = len(cyc)
    parent, owner, size, order = _hanging_trees(g, cyc)
    hang = 1
    for u in range(n):
        if parent[u] >= 0:
            hang *= size[u]
    fact = math.factorial(n - 1)
    t = [size[c] for c in cyc]
    scores = [0] * n
    for q in range(h):
        # delete edge (cyc[q], cyc[q+1]); the cycle becomes a path
        path = [(q + 1 + j) % h for j in range(h)]
        ts = [t[p] for p in path]
        pre = [0] * h
        acc = 0
        for j in range(h):
            acc += ts[j]
            pre[j] = acc
        suf = [0] * h
        acc = 0
        for j in range(h - 1, -1, -1):
            acc += ts[j]
            suf[j] = acc
        left = [1] * h
        for j in range(1, h):
            left[j] = left[j - 1] * pre[j - 1]
        right = [1] * h
        for j in range(h - 2, -1, -1):
            right[j] = right[j + 1] * suf[j + 1]
        for j in range(h):
            scores[cyc[path[j]]] += fact // (hang * left[j] * right[j])
    for u in order:
        if parent[u] >= 0:
            scores[u] = scores[parent[u]] * size[u] // (n - size[u])
    return ScoreTable(tuple(scores), "big_integer", "max")


def balanced_nodes(g: Graph) -> tuple[int, ...]:
    """Nodes whose removal leaves only components of at most ``n/2`` nodes."""
    _require_connected(g)
    out = []
    for v in range(g.n):
        seen = {v}
        worst = 0
        for w in g.adj[v]:
            if w in seen:
                continue
            comp = 0
            stack = [w]
            seen.add(w)
            while stack:
                u = stack.pop()
                comp += 1
                for x in g.adj[u]:
                    if x not in seen:
                        seen.add(x)
                        stack.append(x)
            worst = max(worst, comp)
        if 2 * worst <= g.n:
            out.append(v)
    return tuple(out)


def epidemic_center(g: Graph) -> tuple[int, ...]:
    """Epidemic center(s) of a unicyclic graph.

    A unique balanced node is returned without building the table; otherwise
    the summed spanning-tree table decides.
    """
    if not g.is_unicyclic:
        raise GraphError("graph is not unicyclic")
    balanced = balanced_nodes(g)
    if len(balanced) == 1:
        return balanced
    return epidemic_centrality_unicyclic(g).extremum


# --------------------------------------------------------------------------
# Statistical distance centrality
# --------------------------------------------------------------------------


def sdc_weights(graph: Graph, end_vertex: Sequence[bool], cap: int = 20) -> tuple[Fraction, ...]:
    """``w_u = C(u) / (C(u) + 1)`` with ``C(u) = 1`` at end vertices and ``w_u = 1`` off cycles."""
    weights = []
    for u in range(graph.n):
        if end_vertex[u]:
            weights.append(Fraction(1, 2))
            continue
        c = minimum_chordless_cycle_size(graph, u, cap)
        if isinstance(c, CycleSize):
            weights.append(Fraction(1))
        else:
            weights.append(Fraction(c, c + 1))
    return tuple(weights)


def sdc_scores(graph: Graph, end_vertex: Sequence[bool], cap: int = 20) -> ScoreTable:
    """Weighted distance sums ``SDC(v) = sum_u w_u d(v, u)`` (minimised)."""
    _require_connected(graph)
    weights = sdc_weights(graph, end_vertex, cap)
    groups: dict[Fraction, list[int]] = {}
    for u, w in enumerate(weights):
        groups.setdefault(w, []).append(u)
    scores = []
    for v in range(graph.n):
        dist = bfs_distances(graph, v)
        scores.append(sum((w * sum(dist[u] for u in members) for w, members in groups.items()), Fraction(0)))
    return ScoreTable(tuple(scores), "exact_rational", "min")


# --------------------------------------------------------------------------
# Markov chain with rumor-centrality stationary law
# --------------------------------------------------------------------------


def rumor_transition_matrix(g: Graph, c: float) -> np.ndarray:
    """Row-stochastic chain moving to neighbour ``j`` w.p. ``t_j^i / (c (n-1))``.

    The self-loop takes the remaining mass, which is ``(c-1)/c`` on a tree.
    """
    _require_tree(g)
    if not c > 1:
        raise ValueError("c must exceed 1")
    n = g.n
    P = np.zeros((n, n))
    if n == 1:
        P[0, 0] = 1.0
        return P
    rv = rooted_view(g, 0)
    for i in range(n):
        for j in g.adj[i]:
            P[i, j] = rv.branch_size(j, i) / (c * (n - 1))
        P[i, i] = 1.0 - P[i].sum()
    return P


def rumor_markov_stationary(g: Graph, c: float = 2.0, tol: float = 1e-14, max_iter: int = 1_000_000) -> ScoreTable:
    """Stationary distribution of :func:`rumor_transition_matrix` by power iteration."""
    P = rumor_transition_matrix(g, c)
    pi = np.full(g.n, 1.0 / g.n)
    for _ in range(max_iter):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    return ScoreTable(tuple(float(x) for x in pi), "real", "max", tol=1e-12)
