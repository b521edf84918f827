"""1-D fixed-length encoder for paths with prescribed edge-usage counts.

Information bits pick one *list collection*: for every vertex ``i`` an
ordering of its ``r_i`` exits, where successor ``j`` appears ``d_ij`` times.
Walking from the root and leaving vertex ``i`` for the ``k``-th time along the
``k``-th entry of its list traces a closed path of length ``N`` that uses every
edge type exactly ``d_ij`` times.  Pinning the last exit of every non-root
vertex to its parent in an oriented tree guarantees the walk never gets stuck
before all exits are used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .enumerative import ExactCodec
from .graph import Graph, GraphError, LabeledGraph, is_irreducible
from .parallel import DecodeError, _dmat, _join_digits, _split_digits, bits_to_int, int_to_bits, typical_count


@dataclass(frozen=True)
class OrientedTree:
    """Spanning in-tree: every vertex reaches ``root`` by following ``parent``."""

    root: int
    parent: dict[int, int]

    def check(self, g: Graph) -> None:
        if len(self.parent) != g.n - 1 or self.root in self.parent:
            raise GraphError("tree must give a parent to every non-root vertex")
        a = g.adjacency
        for u, p in self.parent.items():
            if not a[u, p]:
                raise GraphError(f"tree edge {u}->{p} is not in the graph")
        for u in self.parent:
            seen = set()
            while u != self.root:
                if u in seen:
                    raise GraphError("parent pointers contain a cycle")
                seen.add(u)
                u = self.parent[u]


def oriented_tree(g: Graph, root: int = 0) -> OrientedTree:
    """Breadth-first in-tree toward ``root`` (predecessors visited in ascending order)."""
    if not is_irreducible(g):
        raise GraphError("graph is not irreducible")
    parent: dict[int, int] = {}
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in g.predecessors[v]:
            if u not in seen:
                seen.add(u)
                parent[u] = v
                queue.append(u)
    return OrientedTree(root, parent)


@dataclass(frozen=True)
class ListCollection:
    """Per-vertex exit orders and, per edge type, the parallel-edge index of each use."""

    lists: tuple[tuple[int, ...], ...]
    parallel: dict[tuple[int, int], tuple[int, ...]]


def _parallel(g: Graph) -> dict[tuple[int, int], list[int]]:
    out: dict[tuple[int, int], list[int]] = {}
    for k, e in enumerate(g.edges):
        out.setdefault((e.source, e.target), []).append(k)
    return out


def list_count(g: Graph, d, t: OrientedTree) -> int:
    """Number of list collections compatible with ``t`` (0 when a tree edge has multiplicity 0).

    Vertices the path never visits have empty lists and are skipped.
    """
    d = _dmat(d)
    r = d.sum(axis=1)
    x = Fraction(typical_count(g, d))
    for u, p in t.parent.items():
        if r[u] == 0:
            continue
        if d[u, p] == 0:
            return 0
        x *= Fraction(int(d[u, p]), int(r[u]))
    assert x.denominator == 1
    return int(x)


class CyclicCoder:
    """Bits <-> closed paths from ``t.root`` with edge-usage matrix ``d``."""

    def __init__(self, g: LabeledGraph, d, t: OrientedTree):
        self.g, self.t = g, t
        self.d = _dmat(d)
        t.check(g)
        if np.any((self.d > 0) & (g.adjacency == 0)):
            raise GraphError("multiplicity on a non-edge")
        if not np.array_equal(self.d.sum(axis=0), self.d.sum(axis=1)):
            raise GraphError("multiplicity matrix is not balanced")
        self.r = self.d.sum(axis=1)
        self.n_steps = int(self.d.sum())
        if self.n_steps and self.r[t.root] == 0:
            raise GraphError("root is not visited")
        for u, p in t.parent.items():
            if self.r[u] and self.d[u, p] == 0:
                raise GraphError(f"tree edge {u}->{p} has multiplicity 0; no list collection exists")
        self.count = list_count(g, self.d, t)
        self.bits = self.count.bit_length() - 1 if self.count else 0
        self.codec = ExactCodec()
        self.edges = _parallel(g)
        self._layout()

    def _free(self, i: int) -> list[tuple[int, int]]:
        # (dest, count) for the unpinned part of list i, dest ascending
        row = self.d[i].copy()
        if i != self.t.root and self.r[i]:
            row[self.t.parent[i]] -= 1
        return [(int(j), int(row[j])) for j in np.flatnonzero(row)]

    def _layout(self):
        radices = []
        for i in range(self.g.n):
            free = self._free(i)
            left = sum(c for _, c in free)
            for _, c in free[:-1]:
                radices.append(self.codec.count(left, c))
                left -= c
        a = self.g.adjacency
        self.multi = [(int(i), int(j)) for i, j in np.argwhere(self.d > 0) if a[i, j] > 1]
        radices += [int(a[i, j]) ** int(self.d[i, j]) for i, j in self.multi]
        self.radices = tuple(radices)

    # -- list collections

    def lists_from_int(self, x: int) -> ListCollection:
        digits = iter(_split_digits(x, self.radices))
        lists = []
        for i in range(self.g.n):
            free = self._free(i)
            length = sum(c for _, c in free)
            slots = list(range(length))
            lst = [0] * length
            for j, c in free[:-1]:
                ones = set(self.codec.encode_ones(len(slots), c, next(digits)))
                for k, s in enumerate(slots):
                    if k in ones:
                        lst[s] = j
                slots = [s for k, s in enumerate(slots) if k not in ones]
            for s in slots:
                lst[s] = free[-1][0]
            if i != self.t.root and self.r[i]:
                lst.append(self.t.parent[i])
            lists.append(tuple(lst))
        a = self.g.adjacency
        par = {}
        for i, j in self.multi:
            v, base, n = next(digits), int(a[i, j]), int(self.d[i, j])
            out = [0] * n
            for k in range(n - 1, -1, -1):
                v, out[k] = divmod(v, base)
            par[(i, j)] = tuple(out)
        return ListCollection(tuple(lists), par)

    def lists_to_int(self, lc: ListCollection) -> int:
        digits = []
        for i in range(self.g.n):
            lst = list(lc.lists[i])
            if i != self.t.root and self.r[i]:
                if not lst or lst[-1] != self.t.parent[i]:
                    raise DecodeError(f"last exit of vertex {i} is not its tree parent")
                lst = lst[:-1]
            free = self._free(i)
            if sorted(lst) != sorted(j for j, c in free for _ in range(c)):
                raise DecodeError(f"exit counts of vertex {i} do not match")
            slots = list(range(len(lst)))
            for j, c in free[:-1]:
                ones = [k for k, s in enumerate(slots) if lst[s] == j]
                digits.append(self.codec.decode_ones(len(slots), c, ones))
                slots = [s for s in slots if lst[s] != j]
        a = self.g.adjacency
        for i, j in self.multi:
            v = 0
            for s in lc.parallel[(i, j)]:
                v = v * int(a[i, j]) + s
            digits.append(v)
        return _join_digits(digits, self.radices)

    def walk(self, lc: ListCollection) -> list[int]:
        """Edge sequence traced by a list collection; raises if the walk stops early."""
        used = [0] * self.g.n
        par_used: dict[tuple[int, int], int] = {}
        v = self.t.root
        path = []
        for _ in range(self.n_steps):
            if used[v] >= len(lc.lists[v]):
                raise GraphError(f"walk stuck at vertex {v} after {len(path)} steps")
            j = lc.lists[v][used[v]]
            used[v] += 1
            k = par_used.get((v, j), 0)
            par_used[(v, j)] = k + 1
            choice = lc.parallel[(v, j)][k] if (v, j) in lc.parallel else 0
            path.append(self.edges[(v, j)][choice])
            v = j
        if v != self.t.root:
            raise GraphError("walk does not close at the root")
        return path

    # -- bits <-> words

    def encode(self, bits) -> tuple[str, ...]:
        bits = list(bits)
        if len(bits) != self.bits:
            raise ValueError(f"encoder takes {self.bits} bits, got {len(bits)}")
        if self.count == 0:
            raise ValueError("no list collection exists")
        lc = self.lists_from_int(bits_to_int(bits))
        return tuple(self.g.edges[e].label for e in self.walk(lc))

    def decode(self, word: Sequence[str]) -> np.ndarray:
        g = self.g
        if len(word) != self.n_steps:
            raise DecodeError(f"word has length {len(word)}, expected {self.n_steps}")
        lists: list[list[int]] = [[] for _ in range(g.n)]
        par: dict[tuple[int, int], list[int]] = {}
        v = self.t.root
        for lab in word:
            e = g.edge_by_label[v].get(lab)
            if e is None:
                raise DecodeError(f"label {lab!r} cannot leave vertex {v}")
            j = g.edges[e].target
            lists[v].append(j)
            par.setdefault((v, j), []).append(self.edges[(v, j)].index(e))
            v = j
        if v != self.t.root:
            raise DecodeError("word does not describe a closed path")
        lc = ListCollection(tuple(map(tuple, lists)), {k: tuple(par.get(k, ())) for k in self.multi})
        x = self.lists_to_int(lc)
        if x >> self.bits:
            raise DecodeError("word is outside the code")
        return int_to_bits(x, self.bits)


def encode_cyclic(g: LabeledGraph, d, t: OrientedTree, bits) -> tuple[str, ...]:
    return CyclicCoder(g, d, t).encode(bits)


def decode_cyclic(g: LabeledGraph, d, t: OrientedTree, word: Sequence[str]) -> np.ndarray:
    return CyclicCoder(g, d, t).decode(word)


def cyclic_rate(g: Graph, d, t: OrientedTree, m_tracks: int) -> float:
    """``floor(log2 count) / M`` for the list-collection code."""
    c = list_count(g, d, t)
    return (c.bit_length() - 1) / m_tracks if c else 0.0
