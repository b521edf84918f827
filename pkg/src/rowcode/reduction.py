"""Moore-style reduction: merge vertices with identical out-edge profiles.

Two vertices stay together while, for every current class, they send the same
number of edges into that class.  The reduced multigraph keeps the literal
edges leaving one representative per class, so a path in it lifts to a path in
the original graph edge by edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import Graph, GraphError


@dataclass(frozen=True)
class EquivalencePartition:
    class_of: tuple[int, ...]
    level: int

    @property
    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(max(self.class_of) + 1)]
        for v, c in enumerate(self.class_of):
            out[c].append(v)
        return out


def _canonical(keys) -> tuple[int, ...]:
    # number classes by first appearance, so class 0 holds vertex 0, etc.
    ids: dict = {}
    return tuple(ids.setdefault(k, len(ids)) for k in keys)


def refine(g: Graph, part: tuple[int, ...]) -> tuple[int, ...]:
    """One refinement step: split classes by per-class out-edge counts."""
    k = max(part) + 1
    keys = []
    for v in range(g.n):
        counts = [0] * k
        for e in g.out_edges[v]:
            counts[part[g.edges[e].target]] += 1
        keys.append((part[v], tuple(counts)))
    return _canonical(keys)


def stable_partition(g: Graph) -> EquivalencePartition:
    part = tuple([0] * g.n)
    level = 0
    while True:
        nxt = refine(g, part)
        if max(nxt) == max(part):
            return EquivalencePartition(part, level)
        part, level = nxt, level + 1


@dataclass(frozen=True)
class ReducedGraph:
    """Quotient multigraph.  Edge ``k`` of ``graph`` is edge ``edge_ids[k]`` of the original."""

    graph: Graph
    class_of: tuple[int, ...]
    representatives: tuple[int, ...]
    edge_ids: tuple[int, ...]
    level: int
    original: Graph

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def _into(self) -> tuple[dict[int, tuple[int, ...]], ...]:
        # original vertex -> reduced class -> its original out-edges into that class
        g = self.original
        out = []
        for v in range(g.n):
            by: dict[int, list[int]] = {}
            for e in g.out_edges[v]:
                by.setdefault(self.class_of[g.edges[e].target], []).append(e)
            out.append({c: tuple(es) for c, es in by.items()})
        return tuple(out)

    def edges_into(self, v: int, cls: int) -> tuple[int, ...]:
        """Original edges leaving vertex ``v`` and entering class ``cls``, in declaration order."""
        return self._into[v].get(cls, ())

    def lift_edge(self, v: int, reduced_edge: int) -> int:
        """Original edge out of ``v`` corresponding to a reduced edge out of ``v``'s class."""
        c = self.class_of[v]
        e = self.edge_ids[reduced_edge]
        src = self.representatives[c]
        if self.graph.edges[reduced_edge].source != c:
            raise GraphError(f"reduced edge {reduced_edge} does not leave class {c}")
        target_cls = self.class_of[self.original.edges[e].target]
        index = self.edges_into(src, target_cls).index(e)
        return self.edges_into(v, target_cls)[index]

    def project_edge(self, e: int) -> int:
        """Reduced edge corresponding to original edge ``e`` (inverse of :meth:`lift_edge`)."""
        g = self.original
        v = g.edges[e].source
        c = self.class_of[v]
        target_cls = self.class_of[g.edges[e].target]
        index = self.edges_into(v, target_cls).index(e)
        rep_edge = self.edges_into(self.representatives[c], target_cls)[index]
        return self._reduced_index[rep_edge]

    @cached_property
    def _reduced_index(self) -> dict[int, int]:
        return {e: k for k, e in enumerate(self.edge_ids)}


def reduce(g: Graph) -> ReducedGraph:
    """Quotient of ``g`` by its stable out-profile partition."""
    part = stable_partition(g)
    k = max(part.class_of) + 1
    reps = [-1] * k
    for v, c in enumerate(part.class_of):
        if reps[c] < 0:
            reps[c] = v
    edges, ids = [], []
    for c in range(k):
        for e in g.out_edges[reps[c]]:
            edges.append((c, part.class_of[g.edges[e].target]))
            ids.append(e)
    names = ["{" + ",".join(g.names[v] for v in members) + "}" for members in part.classes]
    return ReducedGraph(
        graph=Graph(names, edges),
        class_of=part.class_of,
        representatives=tuple(reps),
        edge_ids=tuple(ids),
        level=part.level,
        original=g,
    )


def identity_reduction(g: Graph) -> ReducedGraph:
    """Trivial reduction (every vertex its own class), so both code paths share one interface."""
    ids = tuple(range(len(g.edges)))
    return ReducedGraph(
        graph=Graph(g.names, [(e.source, e.target) for e in g.edges]),
        class_of=tuple(range(g.n)),
        representatives=tuple(range(g.n)),
        edge_ids=ids,
        level=0,
        original=g,
    )


def lift_path(red: ReducedGraph, start_class: int, reduced_path, start_vertex: int | None = None) -> list[int]:
    """Original-graph edges for a reduced path; edge t depends only on reduced edges <= t."""
    v = red.representatives[start_class] if start_vertex is None else start_vertex
    if red.class_of[v] != start_class:
        raise GraphError(f"start vertex {v} is not in class {start_class}")
    out = []
    for re in reduced_path:
        if red.graph.edges[re].source != red.class_of[v]:
            raise GraphError(f"reduced edge {re} does not continue the path")
        e = red.lift_edge(v, re)
        out.append(e)
        v = red.original.edges[e].target
    return out


def check_stable(red: ReducedGraph) -> bool:
    """Every member of a class has the same number of edges into each class."""
    a = np.zeros((red.original.n, red.n), dtype=np.int64)
    for e in red.original.edges:
        a[e.source, red.class_of[e.target]] += 1
    for members in EquivalencePartition(red.class_of, red.level).classes:
        if not all(np.array_equal(a[members[0]], a[v]) for v in members):
            return False
    return True
