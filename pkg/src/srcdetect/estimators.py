"""Source estimators over snapshots and the hop-distance error metric."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .centrality import (
    BIG_INTEGER_LIMIT,
    ScoreTable,
    distance_centrality,
    eccentricity,
    root_rumor_centrality,
    rumor_center,
    rumor_centrality_tree,
    sdc_scores,
)
from .graph_core import GraphError, bfs_distances, bfs_tree, rooted_view
from .likelihood import exact_source_likelihood
from .spread import ENUMERATION_NODE_CAP, EnumerationCapExceeded, Snapshot


class EstimatorKind(str, enum.Enum):
    RUMOR_CENTER = "rumor_center"
    BFS_RC = "bfs_rc"
    MULTI_END_VERTEX = "multi_end_vertex"
    SDC = "sdc"
    JORDAN = "jordan"
    EXACT_ML = "exact_ml"

    @classmethod
    def parse(cls, name: str) -> "EstimatorKind":
        key = name.strip().lower().replace("-", "_")
        aliases = {"alg4": "multi_end_vertex", "rc": "rumor_center", "jc": "jordan", "ml": "exact_ml"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown estimator {name!r}") from None


@dataclass(frozen=True)
class Estimate:
    """Suspect set ``kappa`` (snapshot-local ids) with one score per suspect."""

    kappa: tuple[int, ...]
    scores: tuple
    method: str

    def __post_init__(self) -> None:
        if not self.kappa:
            raise ValueError("suspect set must be nonempty")

    @property
    def representative(self) -> int:
        return min(self.kappa)

    def labels(self, snap: Snapshot) -> tuple[int, ...]:
        return tuple(snap.labels[v] for v in self.kappa)

    def to_json(self, snap: Snapshot) -> dict:
        return {
            "method": self.method,
            "suspects": list(self.labels(snap)),
            "representative": snap.labels[self.representative],
            "scores": [str(s) for s in self.scores],
        }


def _from_table(table, method: str) -> Estimate:
    ext = table.extremum
    return Estimate(ext, tuple(table.scores[v] for v in ext), method)


def _require_tree(snap: Snapshot) -> None:
    if not snap.graph.is_tree:
        raise GraphError("estimator requires a tree snapshot")


def bfs_rumor_scores(snap: Snapshot, shared_tree: bool = False):
    """Rumor-centrality scores on breadth-first spanning trees.

    By default each candidate ``v`` is scored in the BFS tree rooted at ``v``.
    With ``shared_tree`` a single BFS tree rooted at the lowest-id distance
    center is scored instead.
    """
    g = snap.graph
    regime = "big_integer" if g.n <= BIG_INTEGER_LIMIT else "log_real"
    if shared_tree:
        root = min(distance_centrality(g).extremum)
        return rumor_centrality_tree(bfs_tree(g, root), regime)
    scores = tuple(root_rumor_centrality(bfs_tree(g, v), v, regime) for v in range(g.n))
    return ScoreTable(scores, regime, "max")


def estimate(snap: Snapshot, kind: EstimatorKind | str, *, shared_tree: bool = False) -> Estimate:
    kind = EstimatorKind.parse(kind) if isinstance(kind, str) else kind
    if snap.n == 1:
        return Estimate((0,), (1,), kind.value)
    g = snap.graph
    if kind is EstimatorKind.RUMOR_CENTER:
        _require_tree(snap)
        table = rumor_centrality_tree(g)
        centers = rumor_center(g)
        return Estimate(centers, tuple(table.scores[v] for v in centers), kind.value)
    if kind is EstimatorKind.BFS_RC:
        return _from_table(bfs_rumor_scores(snap, shared_tree), kind.value)
    if kind is EstimatorKind.MULTI_END_VERTEX:
        return algorithm4_multi_end_vertex(snap)
    if kind is EstimatorKind.SDC:
        return _from_table(sdc_scores(g, snap.end_vertices), kind.value)
    if kind is EstimatorKind.JORDAN:
        return _from_table(eccentricity(g), kind.value)
    if kind is EstimatorKind.EXACT_ML:
        if snap.n > ENUMERATION_NODE_CAP:
            raise EnumerationCapExceeded(
                f"exact ML limited to {ENUMERATION_NODE_CAP} nodes, snapshot has {snap.n}"
            )
        table = exact_source_likelihood(snap)
        # end vertices are boundary observations, not candidate sources
        pool = [v for v in range(snap.n) if not snap.end_vertices[v]] or list(range(snap.n))
        top = max(table.values[v] for v in pool)
        best = tuple(v for v in pool if table.values[v] == top)
        return Estimate(best, tuple(table.values[v] for v in best), kind.value)
    raise ValueError(f"unhandled estimator {kind}")


def _descent(snap: Snapshot) -> tuple[int, list[int], list[int], list[int]]:
    """Rumor center, parents, descent subtree and its leaves."""
    g = snap.graph
    vc = min(rumor_center(g))
    rv = rooted_view(g, vc)
    ends = [1 if e else 0 for e in snap.end_vertices]
    for u in reversed(rv.order[1:]):
        ends[rv.parent[u]] += ends[u]
    t_ml = [vc]
    leaves = []
    stack = [vc]
    while stack:
        u = stack.pop()
        best = max((ends[c] for c in rv.children[u]), default=0)
        if best == 0:
            leaves.append(u)
            continue
        for c in rv.children[u]:
            if ends[c] == best:
                t_ml.append(c)
                stack.append(c)
    return vc, list(rv.parent), t_ml, leaves


def algorithm4_multi_end_vertex(snap: Snapshot) -> Estimate:
    """Suspect set for tree snapshots carrying several end vertices.

    Starting from the rumor center ``v_c`` (lowest id when there are two),
    count end vertices per branch, then descend into every child whose count
    equals the largest count among its siblings, while that count is
    positive. The descent forms a subtree ``t_ML``; the suspects are the
    parents of its leaves together with ``v_c``.
    """
    _require_tree(snap)
    method = EstimatorKind.MULTI_END_VERTEX.value
    if snap.n == 1:
        return Estimate((0,), (0,), method)
    vc, parent, _, leaves = _descent(snap)
    kappa = {vc} | {parent[leaf] for leaf in leaves if leaf != vc}
    kappa_t = tuple(sorted(kappa))
    ends = sum(snap.end_vertices)
    return Estimate(kappa_t, (ends,) * len(kappa_t), method)


def t_ml_subtree(snap: Snapshot) -> tuple[int, ...]:
    """Nodes of the descent subtree built by :func:`algorithm4_multi_end_vertex`."""
    _require_tree(snap)
    return tuple(sorted(_descent(snap)[2]))


def top_k_baseline(snap: Snapshot, k: int) -> Estimate:
    """The ``k`` nodes of largest rumor centrality, ties broken by lowest id."""
    _require_tree(snap)
    if not 1 <= k <= snap.n:
        raise ValueError(f"k must lie in [1, {snap.n}]")
    table = rumor_centrality_tree(snap.graph)
    ranked = sorted(range(snap.n), key=lambda v: (-table.scores[v], v))[:k]
    chosen = tuple(sorted(ranked))
    return Estimate(chosen, tuple(table.scores[v] for v in chosen), "top_k")


def estimation_error(est: Estimate, truth: int, snap: Snapshot) -> int:
    """Fewest snapshot hops from ``truth`` to any suspect."""
    if not 0 <= truth < snap.n:
        raise ValueError("true source is not in the snapshot")
    dist = bfs_distances(snap.graph, truth)
    return min(dist[v] for v in est.kappa)
