"""Directed multigraphs and deterministic edge-labeled graphs.

Vertices are the dense integers ``0..n-1`` in declaration order; every matrix
in the package is indexed in that order.  Parallel edges are kept as separate
edge records because the encoder has to name individual parallel edges.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs or graphs violating a precondition."""


class Edge(NamedTuple):
    source: int
    target: int
    label: str | None = None


class Graph:
    """Directed multigraph on vertices ``0..n-1``.

    ``names`` are display names only.  Edge order is significant: it fixes the
    index of each edge among its parallel siblings.
    """

    def __init__(self, names: Sequence[str], edges: Iterable[Edge | tuple]):
        self.names = tuple(str(v) for v in names)
        self.edges = tuple(Edge(*e) for e in edges)
        n = len(self.names)
        for e in self.edges:
            if not (0 <= e.source < n and 0 <= e.target < n):
                raise GraphError(f"edge {e} has an endpoint outside 0..{n - 1}")

    @property
    def n(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"{type(self).__name__}(|V|={self.n}, |E|={len(self.edges)})"

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for e in self.edges:
            a[e.source, e.target] += 1
        a.setflags(write=False)
        return a

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for k, e in enumerate(self.edges):
            out[e.source].append(k)
        return tuple(tuple(x) for x in out)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(sorted({self.edges[k].target for k in ks})) for ks in self.out_edges
        )

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pred: list[set[int]] = [set() for _ in range(self.n)]
        for e in self.edges:
            pred[e.target].add(e.source)
        return tuple(tuple(sorted(p)) for p in pred)

    def a_min_max(self) -> tuple[int, int]:
        nz = self.adjacency[self.adjacency > 0]
        if nz.size == 0:
            return 0, 0
        return int(nz.min()), int(nz.max())

    @classmethod
    def from_adjacency(cls, a, names: Sequence[str] | None = None) -> "Graph":
        a = np.asarray(a, dtype=np.int64)
        n = a.shape[0]
        edges = [(i, j) for i in range(n) for j in range(n) for _ in range(int(a[i, j]))]
        return cls(names if names is not None else [str(i) for i in range(n)], edges)


class LabeledGraph(Graph):
    """Edge-labeled graph presenting a 1-D constraint.

    Labeling is expected to be deterministic (distinct labels on the edges
    leaving any vertex); use :func:`validate_graph` to check.
    """

    def __init__(
        self,
        names: Sequence[str],
        edges: Iterable[Edge | tuple],
        alphabet: Sequence[str] | None = None,
    ):
        super().__init__(names, edges)
        for e in self.edges:
            if e.label is None:
                raise GraphError(f"edge {e} has no label")
        if alphabet is None:
            alphabet = sorted({e.label for e in self.edges})
        self.alphabet = tuple(alphabet)

    @cached_property
    def edge_by_label(self) -> tuple[dict[str, int], ...]:
        """Per source vertex, label -> edge id (last one wins if nondeterministic)."""
        return tuple(
            {self.edges[k].label: k for k in ks} for ks in self.out_edges
        )

    @cached_property
    def edges_with_label(self) -> dict[str, tuple[int, ...]]:
        by: dict[str, list[int]] = {}
        for k, e in enumerate(self.edges):
            by.setdefault(e.label, []).append(k)
        return {lab: tuple(ks) for lab, ks in by.items()}

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "vertices": list(self.names),
            "edges": [
                {"from": self.names[e.source], "to": self.names[e.target], "label": e.label}
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LabeledGraph":
        try:
            names = [str(v) for v in doc["vertices"]]
            index = {v: i for i, v in enumerate(names)}
            if len(index) != len(names):
                raise GraphError("vertex names are not distinct")
            edges = []
            for e in doc["edges"]:
                if e["from"] not in index or e["to"] not in index:
                    raise GraphError(f"edge {e} references an undeclared vertex")
                edges.append(Edge(index[e["from"]], index[e["to"]], str(e["label"])))
            return cls(names, edges, [str(s) for s in doc["alphabet"]])
        except KeyError as exc:
            raise GraphError(f"graph document is missing field {exc}") from None


def load_graph(path) -> LabeledGraph:
    with open(path, encoding="utf-8") as fh:
        return LabeledGraph.from_json(json.load(fh))


def dump_graph(g: LabeledGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_json(), fh, indent=1)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    irreducible: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_graph(g: Graph) -> ValidationReport:
    """Check labeling determinism and endpoints; report irreducibility.

    Problems are returned, not raised.
    """
    report = ValidationReport(irreducible=is_irreducible(g))
    if len(set(g.names)) != g.n:
        report.violations.append("duplicate vertex names")
    if isinstance(g, LabeledGraph):
        alphabet = set(g.alphabet)
        for v, ks in enumerate(g.out_edges):
            seen: set[str] = set()
            for k in ks:
                lab = g.edges[k].label
                if lab in seen:
                    report.violations.append(
                        f"nondeterministic labeling: label {lab!r} repeats at vertex {g.names[v]}"
                    )
                seen.add(lab)
                if lab not in alphabet:
                    report.violations.append(f"label {lab!r} not in alphabet")
    return report


def bfs_distances(g: Graph, source: int, reverse: bool = False) -> list[int]:
    """Shortest directed path lengths from ``source`` (to it, if ``reverse``); -1 if unreachable."""
    nbrs = g.predecessors if reverse else g.successors
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_irreducible(g: Graph) -> bool:
    if g.n == 0:
        return False
    return min(bfs_distances(g, 0)) >= 0 and min(bfs_distances(g, 0, reverse=True)) >= 0


def shortest_path(g: Graph, s: int, t: int) -> list[int]:
    """Vertex sequence of a shortest s->t path, smallest-index predecessor first."""
    parent = [-1] * g.n
    seen = [False] * g.n
    seen[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u == t:
            break
        for v in g.successors[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                queue.append(v)
    if not seen[t]:
        raise GraphError(f"vertex {t} is unreachable from {s}")
    path = [t]
    while path[-1] != s:
        path.append(parent[path[-1]])
    return path[::-1]


def diameter(g: Graph) -> int:
    """Longest shortest directed path over ordered pairs of distinct vertices."""
    best = 0
    for s in range(g.n):
        dist = bfs_distances(g, s)
        if min(dist) < 0:
            raise GraphError("graph is not irreducible; diameter is infinite")
        best = max(best, max(dist))
    return best


def memory_of(g: LabeledGraph, cap: int | None = None) -> int | None:
    """Smallest m such that the labels of any m+1 consecutive edges fix the last edge.

    Computed by eliminating pairs of distinct vertices that can be reached by
    two equally-labeled paths.  Returns ``None`` when no ``m <= cap`` works
    (the default cap is ``2 |V|^2``).
    """
    if cap is None:
        cap = 2 * g.n * g.n
    by_label = g.edge_by_label
    pairs = {(u, v) for u in range(g.n) for v in range(u + 1, g.n)}
    for m in range(cap + 1):
        nxt = set()
        clash = False
        for u, v in pairs:
            bu, bv = by_label[u], by_label[v]
            if len(bu) > len(bv):
                bu, bv = bv, bu
            for lab, ku in bu.items():
                kv = bv.get(lab)
                if kv is None:
                    continue
                clash = True
                x, y = g.edges[ku].target, g.edges[kv].target
                if x != y:
                    nxt.add((min(x, y), max(x, y)))
        if not clash:
            return m
        pairs = nxt
    return None


def running_example() -> LabeledGraph:
    """Three-vertex graph with adjacency [[1,1,0],[1,0,1],[1,0,0]].

    Each edge is labeled by the name of the vertex it enters.
    """
    names = ["alpha", "beta", "theta"]
    pairs = [(0, 0), (0, 1), (1, 0), (1, 2), (2, 0)]
    return LabeledGraph(names, [Edge(u, v, names[v]) for u, v in pairs], names)
