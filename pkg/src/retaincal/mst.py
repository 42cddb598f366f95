"""Minimum-spanning-tree weight and its sensitivity under edge additions.

Adding an edge can only lower the tree weight, and a new zero-weight edge
``{u, v}`` lowers it by exactly the heaviest edge on the current tree path
between ``u`` and ``v``. The retained-graph sensitivity is therefore the
maximum of that path bottleneck over all absent vertex pairs, computed here
from one tree plus a per-source traversal; an exhaustive recompute-everything
oracle is included for verification on small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DisconnectedGraphError, DomainError
from .mechanism import SensitivityReport, rng_from_seed

Edge = tuple[int, int, float]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with edge weights in [0, B], no loops or multi-edges."""

    vertex_count: int
    edges: tuple[Edge, ...]
    bound_b: float
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise DataError("vertex_count must be >= 1")
        if not self.bound_b > 0:
            raise DomainError(f"bound_b must be > 0, got {self.bound_b}")
        normalized: list[Edge] = []
        seen: set[tuple[int, int]] = set()
        for u, v, w in self.edges:
            if u == v:
                raise DataError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise DataError(f"edge ({u}, {v}) references an unknown vertex")
            if not 0 <= w <= self.bound_b:
                raise DataError(f"weight {w} outside [0, {self.bound_b}]")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in seen:
                raise DataError(f"duplicate edge ({a}, {b})")
            seen.add((a, b))
            normalized.append((a, b, float(w)))
        normalized.sort()
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self.edges}

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.vertex_count)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def is_connected(self) -> bool:
        if self.vertex_count == 1:
            return True
        uf = _UnionFind(self.vertex_count)
        components = self.vertex_count
        for u, v, _ in self.edges:
            if uf.union(u, v):
                components -= 1
        return components == 1

    def with_edge(self, u: int, v: int, w: float) -> "WeightedGraph":
        return WeightedGraph(self.vertex_count, self.edges + ((u, v, w),), self.bound_b)


def _mst_edges(g: WeightedGraph) -> list[Edge]:
    # Kruskal with deterministic tie-breaking by (weight, u, v).
    ordered = sorted(g.edges, key=lambda e: (e[2], e[0], e[1]))
    uf = _UnionFind(g.vertex_count)
    tree: list[Edge] = []
    for u, v, w in ordered:
        if uf.union(u, v):
            tree.append((u, v, w))
            if len(tree) == g.vertex_count - 1:
                break
    if len(tree) != g.vertex_count - 1:
        raise DisconnectedGraphError("graph is not connected; MST weight undefined")
    return tree


def mst_weight(g: WeightedGraph) -> float:
    """Total weight of a minimum spanning tree."""
    return float(sum(w for _, _, w in _mst_edges(g)))


def _tree_bottlenecks(g: WeightedGraph) -> np.ndarray:
    """All-pairs maximum edge weight along the MST path, O(V^2)."""
    tree = _mst_edges(g)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.vertex_count)]
    for u, v, w in tree:
        adj[u].append((v, w))
        adj[v].append((u, w))
    n = g.vertex_count
    bottleneck = np.zeros((n, n))
    for source in range(n):
        stack = [source]
        visited = [False] * n
        visited[source] = True
        while stack:
            node = stack.pop()
            for nxt, w in adj[node]:
                if not visited[nxt]:
                    visited[nxt] = True
                    bottleneck[source, nxt] = max(bottleneck[source, node], w)
                    stack.append(nxt)
    return bottleneck


def rs_mst_edge(g: WeightedGraph) -> SensitivityReport:
    """Retain sensitivity of the MST weight under one edge addition.

    Maximum over absent pairs {u, v} of the tree-path bottleneck between u
    and v; zero for a complete graph (nothing can be added).
    """
    if not g.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    edge_set = g.edge_set()
    bottleneck = _tree_bottlenecks(g)
    best = 0.0
    best_pair: tuple[int, int] | None = None
    n = g.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in edge_set:
                continue
            if best_pair is None or bottleneck[u, v] > best:
                best = float(bottleneck[u, v])
                best_pair = (u, v)
    return SensitivityReport(
        value=best if best_pair is not None else 0.0,
        kind="retain",
        inputs={
            "vertices": n,
            "edges": g.edge_count,
            "argmax_pair": best_pair,
            "B": g.bound_b,
        },
        source="rs_mst_edge",
    )


def gs_mst_edge(bound_b: float) -> SensitivityReport:
    """Global sensitivity B, tight on the near-complete all-B construction."""
    if not bound_b > 0:
        raise DomainError(f"bound_b must be > 0, got {bound_b}")
    return SensitivityReport(
        value=float(bound_b),
        kind="global",
        inputs={"B": bound_b},
        source="gs_mst_edge",
    )


def oracle_rs_mst(g: WeightedGraph) -> SensitivityReport:
    """Exhaustive retain sensitivity: add every absent pair at weight zero.

    Weight zero is the worst case since the tree weight is nonincreasing in
    the added edge's weight. Intended for small graphs (roughly <= 12
    vertices); cost is one MST recompute per absent pair.
    """
    if not g.is_connected():
        raise DisconnectedGraphError("graph is not connected")
    base = mst_weight(g)
    edge_set = g.edge_set()
    best = 0.0
    best_pair: tuple[int, int] | None = None
    n = g.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in edge_set:
                continue
            drop = base - mst_weight(g.with_edge(u, v, 0.0))
            if best_pair is None or drop > best:
                best = float(drop)
                best_pair = (u, v)
    return SensitivityReport(
        value=best if best_pair is not None else 0.0,
        kind="oracle",
        inputs={"vertices": n, "argmax_pair": best_pair, "B": g.bound_b},
        source="oracle_rs_mst",
    )


class ConvergenceBudgetError(DataError):
    """Subgraph sampling ran out of attempts before collecting enough accepts."""

    def __init__(self, attempts: int, accepted: int, wanted: int):
        super().__init__(
            f"rejected too many subgraphs: {accepted}/{wanted} accepted "
            f"after {attempts} attempts; lower min_density or target_nodes"
        )
        self.attempts = attempts
        self.accepted = accepted
        self.wanted = wanted


def sample_subgraphs(
    g: WeightedGraph,
    target_nodes: int = 100,
    min_density: float = 0.1,
    count: int = 500,
    seed: int = 0,
    rejection_budget_factor: int = 100,
) -> list[WeightedGraph]:
    """Sample induced subgraphs by BFS from random start vertices.

    Each attempt grows a breadth-first ball to ``target_nodes`` vertices and
    keeps the induced subgraph iff its edge density is at least
    ``min_density``. Deterministic given the seed; every accepted subgraph is
    connected by construction and inherits the parent's weight bound.
    """
    if target_nodes > g.vertex_count:
        raise DataError(
            f"target_nodes={target_nodes} exceeds vertex count {g.vertex_count}"
        )
    if target_nodes < 2:
        raise DomainError("target_nodes must be >= 2")
    rng = rng_from_seed(seed)
    adj = g.adjacency()
    # neighbor order fixed ahead of time so traversal is reproducible
    neighbor_ids = [sorted(v for v, _ in nbrs) for nbrs in adj]
    edge_set = g.edge_set()
    max_pairs = target_nodes * (target_nodes - 1) // 2

    out: list[WeightedGraph] = []
    weights = {(u, v): w for u, v, w in g.edges}
    budget = rejection_budget_factor * count
    attempts = 0
    while len(out) < count:
        if attempts >= budget:
            raise ConvergenceBudgetError(attempts, len(out), count)
        attempts += 1
        start = int(rng.integers(0, g.vertex_count))
        selected: list[int] = [start]
        in_ball = {start}
        frontier = [start]
        while frontier and len(selected) < target_nodes:
            nxt_frontier: list[int] = []
            for node in frontier:
                for nbr in neighbor_ids[node]:
                    if nbr not in in_ball:
                        in_ball.add(nbr)
                        selected.append(nbr)
                        nxt_frontier.append(nbr)
                        if len(selected) == target_nodes:
                            break
                if len(selected) == target_nodes:
                    break
            frontier = nxt_frontier
        if len(selected) < target_nodes:
            continue  # start vertex sat in a too-small region
        ordered = sorted(selected)
        index = {v: i for i, v in enumerate(ordered)}
        sub_edges = [
            (index[u], index[v], weights[(u, v)])
            for (u, v) in edge_set
            if u in index and v in index
        ]
        if len(sub_edges) / max_pairs < min_density:
            continue
        out.append(
            WeightedGraph(target_nodes, tuple(sorted(sub_edges)), g.bound_b)
        )
    return out
