"""From the maxentropic edge frequencies to an integer multiplicity matrix.

The real matrix ``P`` (expected number of tracks on each edge type) is rounded
by a bounded integer flow so that every entry, row sum, column sum and the
total stay within floor/ceiling of their real counterparts.  The remaining
row/column imbalance (at most one per vertex) is repaired by adding
shortest surplus-to-deficiency paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .graph import Graph, GraphError, diameter, shortest_path
from .spectral import MarkovChainOnGraph

SNAP = 1e-9


class InfeasibleFlowError(RuntimeError):
    pass


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= SNAP else x


def floor_ceil(x: float) -> tuple[int, int]:
    x = _snap(float(x))
    return math.floor(x), math.ceil(x)


@dataclass(frozen=True)
class TargetMatrix:
    m_tracks: int
    m_prime: int
    rho: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class QuantizedMatrix:
    p_tilde: np.ndarray

    @property
    def rho_tilde(self) -> np.ndarray:
        """Row sums (tracks leaving each vertex)."""
        return self.p_tilde.sum(axis=1)

    @property
    def r_tilde(self) -> np.ndarray:
        """Column sums (tracks entering each vertex)."""
        return self.p_tilde.sum(axis=0)


@dataclass(frozen=True)
class MultiplicityMatrix:
    d: np.ndarray
    m_tracks: int

    @property
    def n_tracks_used(self) -> int:
        return int(self.d.sum())

    @property
    def r(self) -> np.ndarray:
        return self.d.sum(axis=1)

    def to_json(self) -> dict:
        return {"d": self.d.tolist(), "tracks": self.m_tracks}

    @classmethod
    def from_json(cls, doc: dict) -> "MultiplicityMatrix":
        return cls(np.asarray(doc["d"], dtype=np.int64), int(doc["tracks"]))


@dataclass(frozen=True)
class CorrectionMatrix:
    f: np.ndarray
    source: int
    sink: int


def reserved_tracks(g: Graph) -> int:
    """Tracks held back for the imbalance repair: floor(|V| diam(G) / 2)."""
    return g.n * diameter(g) // 2


def target_matrix(g: Graph, chain: MarkovChainOnGraph, m_tracks: int,
                  m_prime: int | None = None) -> TargetMatrix:
    if m_prime is None:
        m_prime = m_tracks - reserved_tracks(g)
    if m_prime < 1:
        raise GraphError(
            f"M={m_tracks} is too small: need M > |V| diam(G) / 2 = {reserved_tracks(g)}"
        )
    rho = m_prime * np.asarray(chain.stationary, dtype=float)
    p = rho[:, None] * np.asarray(chain.transition, dtype=float)
    return TargetMatrix(m_tracks=m_tracks, m_prime=m_prime, rho=rho, p=p)


def feasible_flow(nodes, arcs) -> dict:
    """Integer flow meeting lower/upper bounds on every arc of a circulation.

    ``arcs`` is a list of ``(u, v, lower, upper)``; the result maps arc index
    to flow.  Lower bounds are moved into node excesses and the residual
    problem is solved as one integer max-flow from a super source.
    """
    net = nx.DiGraph()
    net.add_nodes_from(nodes)
    excess = {u: 0 for u in nodes}
    for u, v, lo, hi in arcs:
        if lo > hi:
            raise InfeasibleFlowError(f"arc {u}->{v} has lower bound {lo} > upper bound {hi}")
        if net.has_edge(u, v):
            raise ValueError("parallel arcs are not supported")
        net.add_edge(u, v, capacity=hi - lo)
        excess[v] += lo
        excess[u] -= lo
    src, snk = ("_S",), ("_T",)
    need = 0
    for u in nodes:
        if excess[u] > 0:
            net.add_edge(src, u, capacity=excess[u])
            need += excess[u]
        elif excess[u] < 0:
            net.add_edge(u, snk, capacity=-excess[u])
    if need:
        value, flow = nx.maximum_flow(net, src, snk)
        if value != need:
            raise InfeasibleFlowError("no flow satisfies the bounds")
    else:
        flow = {u: {} for u in nodes}
    return {k: lo + flow[u].get(v, 0) for k, (u, v, lo, hi) in enumerate(arcs)}


def good_quantization(t: TargetMatrix) -> QuantizedMatrix:
    """Integer matrix within floor/ceiling of ``P`` entrywise, per row, per column, exact total."""
    p = t.p
    n = p.shape[0]
    sigma, omega, tau = "s", "w", "t"
    rows = [("r", i) for i in range(n)]
    cols = [("c", j) for j in range(n)]
    arcs = [(tau, sigma, t.m_prime, t.m_prime)]  # closes the circulation
    arcs.append((sigma, omega, t.m_prime, t.m_prime))
    for i in range(n):
        arcs.append((omega, rows[i], *floor_ceil(p[i].sum())))
    entry_arcs = []
    for i in range(n):
        for j in range(n):
            if p[i, j] > 0:
                entry_arcs.append((i, j, len(arcs)))
                arcs.append((rows[i], cols[j], *floor_ceil(p[i, j])))
    for j in range(n):
        arcs.append((cols[j], tau, *floor_ceil(p[:, j].sum())))
    try:
        flow = feasible_flow([sigma, omega, tau, *rows, *cols], arcs)
    except InfeasibleFlowError as exc:
        raise InfeasibleFlowError(f"good quantization not found: {exc}") from None
    pt = np.zeros((n, n), dtype=np.int64)
    for i, j, k in entry_arcs:
        pt[i, j] = flow[k]
    return QuantizedMatrix(pt)


def quantization_violations(t: TargetMatrix, q: QuantizedMatrix) -> list[str]:
    p, pt = t.p, q.p_tilde
    out = []
    if int(pt.sum()) != t.m_prime:
        out.append(f"total {int(pt.sum())} != M' = {t.m_prime}")
    n = p.shape[0]
    for i in range(n):
        for j in range(n):
            lo, hi = floor_ceil(p[i, j])
            if not lo <= pt[i, j] <= hi:
                out.append(f"entry ({i},{j}) = {pt[i, j]} outside [{lo},{hi}]")
        lo, hi = floor_ceil(p[i].sum())
        if not lo <= pt[i].sum() <= hi:
            out.append(f"row {i} sum outside [{lo},{hi}]")
        lo, hi = floor_ceil(p[:, i].sum())
        if not lo <= pt[:, i].sum() <= hi:
            out.append(f"column {i} sum outside [{lo},{hi}]")
    return out


def correction_matrix(g: Graph, s: int, t: int) -> CorrectionMatrix:
    """Edge counts along a shortest s->t path."""
    if s == t:
        raise GraphError("source and sink must differ")
    path = shortest_path(g, s, t)
    f = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in zip(path, path[1:]):
        f[u, v] += 1
    return CorrectionMatrix(f, s, t)


def surplus_deficiency(q: QuantizedMatrix) -> tuple[list[int], list[int]]:
    """Vertices entered more often than left, and vice versa, ascending."""
    diff = q.r_tilde - q.rho_tilde
    return [int(i) for i in np.flatnonzero(diff > 0)], [int(i) for i in np.flatnonzero(diff < 0)]


def multiplicity_matrix(g: Graph, q: QuantizedMatrix, m_tracks: int,
                        pairing: list[tuple[int, int]] | None = None) -> MultiplicityMatrix:
    """Balance ``P~`` by adding one shortest surplus->deficiency path per imbalanced pair."""
    surplus, deficit = surplus_deficiency(q)
    diff = q.r_tilde - q.rho_tilde
    if np.any(np.abs(diff) > 1):
        raise GraphError("quantized matrix is off balance by more than one at some vertex")
    if pairing is None:
        pairing = list(zip(surplus, deficit))
    d = q.p_tilde.copy()
    for s, t in pairing:
        d += correction_matrix(g, s, t).f
    return MultiplicityMatrix(d, m_tracks)


def validate_multiplicity(g: Graph, m_tracks: int, d) -> list[str]:
    """Violated multiplicity-matrix conditions (empty when valid)."""
    d = np.asarray(d.d if isinstance(d, MultiplicityMatrix) else d)
    a = g.adjacency
    out = []
    if d.shape != a.shape:
        return [f"shape {d.shape} does not match graph {a.shape}"]
    if np.any(d < 0):
        out.append("negative entry")
    if int(d.sum()) > m_tracks:
        out.append(f"total {int(d.sum())} exceeds M = {m_tracks}")
    if not np.array_equal(d.sum(axis=0), d.sum(axis=1)):
        out.append("row sums differ from column sums (unbalanced)")
    bad = np.argwhere((d > 0) & (a == 0))
    if len(bad):
        out.append(f"positive entries on non-edges: {[tuple(map(int, x)) for x in bad]}")
    return out


def design_multiplicity(g: Graph, chain: MarkovChainOnGraph, m_tracks: int) -> MultiplicityMatrix:
    """Multiplicity matrix for ``m_tracks`` tracks.

    Uses the reserved-track construction whenever ``M > |V| diam / 2``.  For
    smaller ``M`` it tries every smaller target total and keeps the valid
    matrix with the largest number of typical edges.
    """
    from .parallel import typical_count

    if m_tracks > reserved_tracks(g):
        t = target_matrix(g, chain, m_tracks)
        return multiplicity_matrix(g, good_quantization(t), m_tracks)
    best, best_count = None, -1
    for total in range(m_tracks, 0, -1):
        t = target_matrix(g, chain, m_tracks, m_prime=total)
        dm = multiplicity_matrix(g, good_quantization(t), m_tracks)
        if dm.n_tracks_used > m_tracks:
            continue
        count = typical_count(g, dm)
        if count > best_count:
            best, best_count = dm, count
    if best is None:
        raise GraphError(f"no multiplicity matrix found for M={m_tracks}")
    return best


def dump_matrix(m: MultiplicityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(m.to_json(), fh)
