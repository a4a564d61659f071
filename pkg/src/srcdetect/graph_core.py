"""Undirected simple graphs, traversal, structural queries and generators.

Node identities are dense integers ``0..n-1`` and adjacency lists are kept
sorted, so every traversal below is deterministic.
"""

from __future__ import annotations

import bisect
import enum
import heapq
import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs or violated structural preconditions."""


class CycleSize(enum.Enum):
    """Sentinels returned by :func:`minimum_chordless_cycle_size`."""

    NONE = "none"
    LEAF = "leaf"


@dataclass(frozen=True, eq=True)
class Graph:
    """Immutable undirected simple graph in canonical adjacency form."""

    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph on ``n`` nodes, rejecting loops and duplicate edges."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for {n} nodes")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if v in nbrs[u]:
                raise GraphError(f"duplicate edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def n(self) -> int:
        return len(self.adj)

    @cached_property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as ``(u, v)`` with ``u < v`` in sorted order."""
        for u, nb in enumerate(self.adj):
            for v in nb:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.adj[u]
        i = bisect.bisect_left(nb, v)
        return i < len(nb) and nb[i] == v

    @cached_property
    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return all(d >= 0 for d in bfs_distances(self, 0))

    @cached_property
    def is_tree(self) -> bool:
        return self.n >= 1 and self.edge_count == self.n - 1 and self.is_connected

    @cached_property
    def is_unicyclic(self) -> bool:
        return self.n >= 3 and self.edge_count == self.n and self.is_connected

    def induced(self, nodes: Sequence[int]) -> tuple["Graph", tuple[int, ...]]:
        """Induced subgraph on ``nodes``; returns it with the sorted id map."""
        keep = tuple(sorted(set(nodes)))
        index = {v: i for i, v in enumerate(keep)}
        edges = [
            (index[u], index[v])
            for u in keep
            for v in self.adj[u]
            if v in index and u < v
        ]
        return Graph.from_edges(len(keep), edges), keep

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges())


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def from_edge_list(lines: str | TextIO | Iterable[str]) -> tuple[Graph, tuple[int, ...]]:
    """Parse ``u v`` lines into a graph plus the external id of each node.

    External ids are compacted to the dense range in ascending order. Lines
    may carry ``#`` comments; blank lines are ignored.
    """
    if isinstance(lines, str):
        lines = io.StringIO(lines)
    us: list[int] = []
    vs: list[int] = []
    linenos: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two node ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative node id")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at node {u}")
        us.append(u)
        vs.append(v)
        linenos.append(lineno)
    if not us:
        return Graph(()), ()
    a = np.asarray(us, dtype=np.int64)
    b = np.asarray(vs, dtype=np.int64)
    ids, inverse = np.unique(np.concatenate([a, b]), return_inverse=True)
    m = len(a)
    lo = np.minimum(inverse[:m], inverse[m:])
    hi = np.maximum(inverse[:m], inverse[m:])
    n = len(ids)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    dup = np.nonzero(sorted_key[1:] == sorted_key[:-1])[0]
    if len(dup):
        first = order[dup[0] + 1]
        raise GraphError(
            f"line {linenos[first]}: duplicate edge ({us[first]}, {vs[first]})"
        )
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    perm = np.lexsort((dst, src))
    src, dst = src[perm], dst[perm]
    bounds = np.searchsorted(src, np.arange(n + 1))
    dst_list = dst.tolist()
    adj = tuple(tuple(dst_list[bounds[i]:bounds[i + 1]]) for i in range(n))
    return Graph(adj), tuple(int(x) for x in ids)


# --------------------------------------------------------------------------
# Traversal and rooted views
# --------------------------------------------------------------------------


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distance from ``source``; unreachable nodes get ``-1``."""
    if not 0 <= source < g.n:
        raise GraphError(f"source {source} out of range")
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    adj = g.adj
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = du
                queue.append(w)
    return dist


def bfs_tree(g: Graph, root: int) -> Graph:
    """Breadth-first spanning tree of a connected graph rooted at ``root``."""
    seen = [False] * g.n
    seen[root] = True
    queue = deque([root])
    edges = []
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if not seen[w]:
                seen[w] = True
                edges.append((u, w))
                queue.append(w)
    if len(edges) != g.n - 1:
        raise GraphError("graph is not connected")
    return Graph.from_edges(g.n, edges)


@dataclass(frozen=True)
class RootedView:
    """A tree hung from ``root``: parents, children and subtree sizes."""

    root: int
    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    subtree_size: tuple[int, ...]
    order: tuple[int, ...] = field(repr=False)

    def branch_size(self, u: int, v: int) -> int:
        """Size of the component containing ``u`` once edge ``u-v`` is cut."""
        if self.parent[u] == v:
            return self.subtree_size[u]
        if self.parent[v] == u:
            return len(self.order) - self.subtree_size[v]
        raise GraphError(f"{u} and {v} are not adjacent")


def rooted_view(g: Graph, root: int) -> RootedView:
    if not g.is_tree:
        raise GraphError("rooted_view requires a tree")
    if not 0 <= root < g.n:
        raise GraphError(f"root {root} out of range")
    parent = [-1] * g.n
    order = [root]
    parent[root] = root
    for u in order:
        for w in g.adj[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
    parent[root] = -1
    size = [1] * g.n
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    children = tuple(
        tuple(w for w in g.adj[u] if parent[w] == u) for u in range(g.n)
    )
    return RootedView(root, tuple(parent), children, tuple(size), tuple(order))


def vertex_contraction(g: Graph, nodes: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Merge ``nodes`` into one vertex.

    Returns the contracted graph and, for every original node, its new id.
    The merged vertex takes id 0 and the others keep their relative order.
    """
    group = set(nodes)
    if not group:
        raise GraphError("cannot contract an empty node set")
    mapping = [0] * g.n
    nxt = 1
    for v in range(g.n):
        if v not in group:
            mapping[v] = nxt
            nxt += 1
    edges = set()
    for u, v in g.edges():
        a, b = mapping[u], mapping[v]
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return Graph.from_edges(nxt, sorted(edges)), tuple(mapping)


# --------------------------------------------------------------------------
# Cycles
# --------------------------------------------------------------------------


def minimum_chordless_cycle_size(g: Graph, v: int, cap: int = 20) -> int | CycleSize:
    """Length of the shortest chordless cycle through ``v``.

    A shortest cycle through a vertex never has a chord (a chord would split
    it into two shorter cycles, one of them still through ``v``), so a
    branch-labelled BFS from ``v`` suffices.
    """
    if not 0 <= v < g.n:
        raise GraphError(f"node {v} out of range")
    if g.degree(v) == 1:
        return CycleSize.LEAF
    dist = {v: 0}
    branch = {v: -1}
    queue = deque([v])
    best = None
    while queue:
        u = queue.popleft()
        du = dist[u]
        if best is not None and 2 * du + 1 >= best:
            break
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = du + 1
                branch[w] = w if u == v else branch[u]
                queue.append(w)
            elif w != v and u != v and branch[w] != branch[u]:
                length = du + dist[w] + 1
                if best is None or length < best:
                    best = length
    if best is None or best > cap:
        return CycleSize.NONE
    return best


def cycle_nodes(g: Graph) -> list[int]:
    """Nodes on the unique cycle of a unicyclic graph, in cyclic order."""
    if not g.is_unicyclic:
        raise GraphError("graph is not unicyclic")
    deg = [g.degree(v) for v in range(g.n)]
    alive = [True] * g.n
    stack = [v for v in range(g.n) if deg[v] == 1]
    while stack:
        u = stack.pop()
        alive[u] = False
        for w in g.adj[u]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
    start = min(v for v in range(g.n) if alive[v])
    cyc = [start]
    prev = -1
    cur = start
    while True:
        nxt = next(w for w in g.adj[cur] if alive[w] and w != prev)
        if nxt == start:
            break
        cyc.append(nxt)
        prev, cur = cur, nxt
        if len(cyc) > g.n:
            raise GraphError("cycle walk failed")
    if len(cyc) > 2 and cyc[1] > cyc[-1]:
        cyc = [cyc[0]] + cyc[:0:-1]
    return cyc


def spanning_trees_unicyclic(g: Graph) -> list[Graph]:
    """The spanning trees of a unicyclic graph, one per deleted cycle edge."""
    cyc = cycle_nodes(g)
    h = len(cyc)
    cyc_edges = sorted(
        (min(cyc[i], cyc[(i + 1) % h]), max(cyc[i], cyc[(i + 1) % h])) for i in range(h)
    )
    trees = []
    for drop in cyc_edges:
        trees.append(Graph.from_edges(g.n, [e for e in g.edges() if e != drop]))
    return trees


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------

FAMILIES = (
    "line",
    "regular_tree",
    "broom",
    "star",
    "grid",
    "circulant",
    "random_regular",
    "barabasi_albert",
    "random_bounded_degree_tree",
)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int | None = None
    d: int | None = None
    width: int | None = None
    height: int | None = None
    t: int | None = None
    k: int | None = None
    connections: tuple[int, ...] = ()
    m: int | None = None
    d_max: int | None = None
    seed: int = 0

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise GraphError(f"{self.family} requires parameter(s): {', '.join(missing)}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))


def line(n: int) -> Graph:
    if n < 1:
        raise GraphError("line needs n >= 1")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> Graph:
    """Star with hub 0 and ``n - 1`` leaves."""
    if n < 1:
        raise GraphError("star needs n >= 1")
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def regular_tree(d: int, n: int) -> Graph:
    """Finite ``d``-regular tree with ``n`` nodes filled in breadth-first order.

    The root gets ``d`` children and every later node ``d - 1``; the last
    level is truncated so the node count is exactly ``n``.
    """
    if d < 2 or n < 1:
        raise GraphError("regular_tree needs d >= 2 and n >= 1")
    edges = []
    nxt = 1
    u = 0
    while nxt < n:
        fan = d if u == 0 else d - 1
        for _ in range(fan):
            if nxt >= n:
                break
            edges.append((u, nxt))
            nxt += 1
        u += 1
    return Graph.from_edges(n, edges)


def broom(t: int, k: int) -> Graph:
    """Line ``0..2t-1`` with ``k`` pendant leaves attached to node ``2t-1``."""
    if t < 1 or k < 0:
        raise GraphError("broom needs t >= 1 and k >= 0")
    n = 2 * t + k
    edges = [(i, i + 1) for i in range(2 * t - 1)]
    edges += [(2 * t - 1, 2 * t + j) for j in range(k)]
    return Graph.from_edges(n, edges)


def grid(width: int, height: int) -> Graph:
    """4-neighbour lattice; node ``r * width + c``."""
    if width < 1 or height < 1:
        raise GraphError("grid needs positive width and height")
    edges = []
    for r in range(height):
        for c in range(width):
            v = r * width + c
            if c + 1 < width:
                edges.append((v, v + 1))
            if r + 1 < height:
                edges.append((v, v + width))
    return Graph.from_edges(width * height, edges)


def circulant(n: int, connections: Iterable[int]) -> Graph:
    """Node ``i`` joined to ``i +- s mod n`` for each ``s`` in ``connections``."""
    conns = sorted(set(connections))
    if n < 3 or not conns or any(s < 1 or s > n // 2 for s in conns):
        raise GraphError("circulant needs n >= 3 and offsets in [1, n//2]")
    edges = set()
    for i in range(n):
        for s in conns:
            j = (i + s) % n
            edges.add((min(i, j), max(i, j)))
    return Graph.from_edges(n, sorted(edges))


def random_regular(n: int, d: int, seed: int, max_tries: int = 10_000) -> Graph:
    """Configuration-model pairing, rejecting samples with loops or multi-edges."""
    if d < 0 or n < 1 or d >= n or (n * d) % 2:
        raise GraphError("random_regular needs 0 <= d < n and n*d even")
    rng = _rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if np.any(a == b):
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        key = lo * n + hi
        if len(np.unique(key)) != len(key):
            continue
        return Graph.from_edges(n, zip(lo.tolist(), hi.tolist()))
    raise GraphError("random_regular: pairing rejection limit reached")


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment starting from a star on ``m + 1`` nodes."""
    if m < 1 or n <= m:
        raise GraphError("barabasi_albert needs 1 <= m < n")
    rng = _rng(seed)
    edges = [(0, i) for i in range(1, m + 1)]
    repeated = [0] * m + list(range(1, m + 1))
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for u in sorted(targets):
            edges.append((u, v))
            repeated.extend((u, v))
    return Graph.from_edges(n, edges)


def random_bounded_degree_tree(n: int, d_max: int, seed: int) -> Graph:
    """Grow a tree breadth-first, each node drawing 0..d_max children.

    Growth stops at exactly ``n`` nodes (the last fan-out is truncated). If
    every open node drew zero children before reaching ``n``, the oldest
    leaf redraws from ``1..d_max``.
    """
    if n < 1 or d_max < 1:
        raise GraphError("random_bounded_degree_tree needs n >= 1 and d_max >= 1")
    rng = _rng(seed)
    edges = []
    queue = deque([0])
    leaves: deque[int] = deque()
    nxt = 1
    while nxt < n:
        if queue:
            u = queue.popleft()
            fan = int(rng.integers(0, d_max + 1))
        else:
            u = leaves.popleft()
            fan = int(rng.integers(1, d_max + 1))
        if fan == 0:
            leaves.append(u)
        for _ in range(fan):
            if nxt >= n:
                break
            edges.append((u, nxt))
            queue.append(nxt)
            nxt += 1
    return Graph.from_edges(n, edges)


def generate(spec: GeneratorSpec) -> Graph:
    f = spec.family
    if f == "line":
        spec.require("n")
        return line(spec.n)
    if f == "star":
        spec.require("n")
        return star(spec.n)
    if f == "regular_tree":
        spec.require("d", "n")
        return regular_tree(spec.d, spec.n)
    if f == "broom":
        spec.require("t", "k")
        return broom(spec.t, spec.k)
    if f == "grid":
        spec.require("width", "height")
        return grid(spec.width, spec.height)
    if f == "circulant":
        spec.require("n")
        return circulant(spec.n, spec.connections)
    if f == "random_regular":
        spec.require("n", "d")
        return random_regular(spec.n, spec.d, spec.seed)
    if f == "barabasi_albert":
        spec.require("n", "m")
        return barabasi_albert(spec.n, spec.m, spec.seed)
    if f == "random_bounded_degree_tree":
        spec.require("n", "d_max")
        return random_bounded_degree_tree(spec.n, spec.d_max, spec.seed)
    raise GraphError(f"unknown generator family {f!r}")


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    """Uniform random labelled tree via a random Prüfer sequence."""
    if n <= 2:
        return line(n)
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return Graph.from_edges(n, edges)
