"""M-track parallel encoder and its sliding-block decoder.

At each stage every used track sits at a vertex, and the multiset of vertices is
fixed (a *typical* state).  The stage's information bits select, for the tracks
sitting at each vertex, which of them go to which successor (nested
constant-weight choices) and which parallel edge each of them takes.  Because
the multiplicity matrix is balanced, the next state is typical again.

Encoding happens on a *coding graph*: either the labeled graph itself or its
Moore-style reduction.  Per-track edges chosen in the coding graph are lifted
to edges of the labeled graph, whose labels form the output row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .enumerative import EnumTables, ExactCodec, FastCodec
from .graph import Graph, LabeledGraph, memory_of
from .quantize import MultiplicityMatrix, design_multiplicity, validate_multiplicity
from .reduction import ReducedGraph, identity_reduction, reduce
from .spectral import maxentropic_chain


class DecodeError(ValueError):
    """Raised when a row is not the image of any stage input."""


def _dmat(d) -> np.ndarray:
    return np.asarray(d.d if isinstance(d, MultiplicityMatrix) else d, dtype=np.int64)


def multinomial(parts: Sequence[int]) -> int:
    out, n = 1, 0
    for k in parts:
        n += k
        out *= math.comb(n, k)
    return out


def typical_count(g: Graph, d) -> int:
    """Number of typical edges leaving a typical vertex (exact)."""
    d = _dmat(d)
    a = g.adjacency
    total = 1
    for i in range(d.shape[0]):
        row = [int(x) for x in d[i] if x]
        total *= multinomial(row)
        for j in np.flatnonzero(d[i]):
            total *= int(a[i, j]) ** int(d[i, j])
    return total


def rate(delta: int, m_tracks: int) -> float:
    """Bits per track per stage, ``floor(log2 delta) / M``."""
    if delta < 1:
        return 0.0
    return (delta.bit_length() - 1) / m_tracks


# ---------------------------------------------------------------- break-merge


@dataclass(frozen=True)
class BreakStep:
    group: int
    dests: tuple[int, ...]  # destinations split off into ``part``
    part: int
    rest: int


@dataclass(frozen=True)
class MergeStep:
    first: int
    second: int
    merged: int


@dataclass(frozen=True)
class BreakMergePlan:
    """Fixed sequence of group splits and merges shared by encoder and decoder.

    Groups ``0..n-1`` start as "tracks at vertex i"; new groups get fresh ids.
    """

    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> list:
        out = []
        for s in self.steps:
            if isinstance(s, BreakStep):
                out.append({"break": s.group, "dests": list(s.dests), "part": s.part, "rest": s.rest})
            else:
                out.append({"merge": [s.first, s.second], "into": s.merged})
        return out

    @classmethod
    def from_json(cls, doc: list) -> "BreakMergePlan":
        steps = []
        for s in doc:
            if "break" in s:
                steps.append(BreakStep(s["break"], tuple(s["dests"]), s["part"], s["rest"]))
            else:
                steps.append(MergeStep(s["merge"][0], s["merge"][1], s["into"]))
        return cls(tuple(steps))


def _initial_groups(g: Graph, d: np.ndarray) -> dict[int, dict[int, tuple[int, int]]]:
    # group id -> {dest: (count, parallel edges)}
    a = g.adjacency
    return {
        i: {int(j): (int(d[i, j]), int(a[i, j])) for j in np.flatnonzero(d[i])}
        for i in range(d.shape[0])
        if d[i].any()
    }


def apply_plan(g: Graph, d, plan: BreakMergePlan):
    """Replay a plan on the group profiles.

    Returns ``(breaks, finals)``: per break step ``(group size, split size)``,
    and the final groups as ``{id: {dest: (count, a)}}``.
    """
    groups = _initial_groups(g, _dmat(d))
    breaks = []
    for s in plan.steps:
        if isinstance(s, BreakStep):
            prof = groups.pop(s.group)
            part = {j: prof[j] for j in s.dests}
            rest = {j: v for j, v in prof.items() if j not in part}
            if not part or not rest:
                raise ValueError(f"break step {s} does not split group {s.group}")
            breaks.append((sum(c for c, _ in prof.values()), sum(c for c, _ in part.values())))
            groups[s.part], groups[s.rest] = part, rest
        else:
            p1, p2 = groups.pop(s.first), groups.pop(s.second)
            if {j: a for j, (_, a) in p1.items()} != {j: a for j, (_, a) in p2.items()}:
                raise ValueError(f"merge step {s} joins groups with different edge profiles")
            groups[s.merged] = {j: (p1[j][0] + p2[j][0], p1[j][1]) for j in sorted(p1)}
    return breaks, groups


def build_break_merge_plan(g: Graph, d) -> BreakMergePlan:
    """Greedy break-merge.

    Repeatedly take the pair of groups sharing the most (destination,
    parallel-count) pairs -- ties to the smallest ids -- split off whatever
    the two do not share, and merge the shared parts.  Only overlaps of two or
    more destinations are used, since merging single-destination groups
    gains nothing.  Stops when no pair overlaps.
    """
    groups = {gid: {j: a for j, (_, a) in prof.items()} for gid, prof in _initial_groups(g, _dmat(d)).items()}
    next_id = max(groups, default=-1) + 1
    next_id = max(next_id, g.n)
    steps: list = []
    while True:
        ids = sorted(groups)
        best = None
        for x, gx in enumerate(ids):
            px = groups[gx]
            for gy in ids[x + 1:]:
                py = groups[gy]
                common = [j for j in px if py.get(j) == px[j]]
                if len(common) >= 2 and (best is None or len(common) > best[0]):
                    best = (len(common), gx, gy, common)
        if best is None:
            return BreakMergePlan(tuple(steps))
        _, gx, gy, common = best
        merged_profile = {j: groups[gx][j] for j in common}
        shared = []
        for gid in (gx, gy):
            prof = groups.pop(gid)
            if len(common) < len(prof):
                part, rest = next_id, next_id + 1
                next_id += 2
                steps.append(BreakStep(gid, tuple(common), part, rest))
                groups[rest] = {j: a for j, a in prof.items() if j not in common}
                shared.append(part)
            else:
                shared.append(gid)
        steps.append(MergeStep(shared[0], shared[1], next_id))
        groups[next_id] = merged_profile
        next_id += 1


def typical_count_bm(g: Graph, d, plan: BreakMergePlan) -> int:
    """Number of stage choices with the grouped (break-merge) encoding."""
    breaks, finals = apply_plan(g, d, plan)
    total = 1
    for n, k in breaks:
        total *= math.comb(n, k)
    for prof in finals.values():
        total *= multinomial([c for c, _ in prof.values()])
        for c, a in prof.values():
            total *= a ** c
    return total


# ---------------------------------------------------------------- encoder plan


def bits_to_int(bits) -> int:
    """Big-endian (most significant bit first) value of a 0/1 sequence."""
    s = "".join("1" if b else "0" for b in bits)
    return int(s, 2) if s else 0


def int_to_bits(x: int, width: int) -> np.ndarray:
    if x >> width:
        raise ValueError(f"{x} does not fit in {width} bits")
    s = format(x, "b").zfill(width) if width else ""
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0") if s else np.zeros(0, dtype=np.uint8)


@dataclass(frozen=True)
class _Break:
    group: int
    dests: frozenset
    part: int
    rest: int
    n: int
    k: int


@dataclass(frozen=True)
class _Merge:
    first: int
    second: int
    merged: int


@dataclass(frozen=True)
class _Final:
    group: int
    dests: tuple[tuple[int, int, int], ...]  # (dest, count, parallel edges)


@dataclass
class EncoderPlan:
    """Everything encoder and decoder must agree on.

    ``coding`` is the graph the multiplicity matrix lives on (the labeled graph
    itself, or its reduction); ``d`` is indexed by its vertices.
    """

    graph: LabeledGraph
    coding: ReducedGraph
    d: MultiplicityMatrix
    m_tracks: int
    mu: int = 24
    eps: int = 32
    exact: bool = False
    eta: int | None = None
    bm: BreakMergePlan = field(default_factory=BreakMergePlan)
    reduced: bool = False

    def __post_init__(self):
        problems = validate_multiplicity(self.coding.graph, self.m_tracks, self.d)
        if problems:
            raise ValueError(f"invalid multiplicity matrix: {problems}")
        self.n_tracks = self.d.n_tracks_used
        if self.n_tracks < 1:
            raise ValueError("multiplicity matrix uses no tracks")
        mem = memory_of(self.graph)
        if mem is None:
            raise ValueError("labeled graph does not have finite memory")
        self.memory = mem
        r = self.d.r
        self.start = tuple(
            self.coding.representatives[i] for i in range(len(r)) for _ in range(int(r[i]))
        )
        n_max = int(r.max())
        self.codec = ExactCodec() if self.exact else FastCodec(EnumTables(n_max, n_max, self.mu, self.eps))
        self._compile()

    def _compile(self):
        breaks, finals = apply_plan(self.coding.graph, self.d, self.bm)
        ops = []
        it = iter(breaks)
        for s in self.bm.steps:
            if isinstance(s, BreakStep):
                n, k = next(it)
                ops.append(_Break(s.group, frozenset(s.dests), s.part, s.rest, n, k))
            else:
                ops.append(_Merge(s.first, s.second, s.merged))
        self.ops = tuple(ops)
        self.finals = tuple(
            _Final(gid, tuple((j, c, a) for j, (c, a) in sorted(prof.items())))
            for gid, prof in sorted(finals.items())
        )
        count = self.codec.count
        radices = [count(op.n, op.k) for op in self.ops if isinstance(op, _Break)]
        for fin in self.finals:
            left = sum(c for _, c, _ in fin.dests)
            for _, c, _ in fin.dests[:-1]:
                radices.append(count(left, c))
                left -= c
            for _, c, a in fin.dests:
                radices.extend(self._parallel_radices(c, a))
        self.radices = tuple(radices)
        self.capacity = math.prod(self.radices)
        self.bits_per_stage = self.capacity.bit_length() - 1

    def _parallel_blocks(self, c: int, a: int) -> list[int]:
        if a == 1:
            return []
        if self.eta is None:
            return [c]
        return [min(self.eta, c - b) for b in range(0, c, self.eta)]

    def _parallel_radices(self, c: int, a: int) -> list[int]:
        if self.eta is None:
            return [a ** c] if a > 1 else []
        return [1 << ((a ** ln).bit_length() - 1) for ln in self._parallel_blocks(c, a)]

    @property
    def delta(self) -> int:
        if len(self.bm):
            return typical_count_bm(self.coding.graph, self.d, self.bm)
        return typical_count(self.coding.graph, self.d)

    @property
    def rate(self) -> float:
        return rate(self.delta, self.m_tracks)

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "d": self.d.to_json(),
            "params": {
                "reduce": self.reduced, "mu": self.mu, "eps": self.eps,
                "exact": self.exact, "eta": self.eta,
            },
            "break_merge": self.bm.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EncoderPlan":
        g = LabeledGraph.from_json(doc["graph"])
        p = doc["params"]
        coding = reduce(g) if p["reduce"] else identity_reduction(g)
        return cls(
            graph=g, coding=coding, d=MultiplicityMatrix.from_json(doc["d"]),
            m_tracks=int(doc["d"]["tracks"]), mu=p["mu"], eps=p["eps"], exact=p["exact"],
            eta=p["eta"], bm=BreakMergePlan.from_json(doc["break_merge"]), reduced=p["reduce"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def build_plan(g: LabeledGraph, m_tracks: int, *, reduced: bool = False, break_merge: bool = False,
               mu: int = 24, eps: int = 32, exact: bool = False, eta: int | None = None) -> EncoderPlan:
    """Design the multiplicity matrix (on ``g`` or its reduction) and compile the plan."""
    coding = reduce(g) if reduced else identity_reduction(g)
    chain = maxentropic_chain(coding.graph)
    d = design_multiplicity(coding.graph, chain, m_tracks)
    bm = build_break_merge_plan(coding.graph, d) if break_merge else BreakMergePlan()
    return EncoderPlan(g, coding, d, m_tracks, mu=mu, eps=eps, exact=exact, eta=eta, bm=bm, reduced=reduced)


# ---------------------------------------------------------------- stages


def _split_digits(x: int, radices: Sequence[int]) -> list[int]:
    digits = []
    for rdx in reversed(radices):
        x, dgt = divmod(x, rdx)
        digits.append(dgt)
    return digits[::-1]


def _join_digits(digits: Sequence[int], radices: Sequence[int]) -> int:
    x = 0
    for dgt, rdx in zip(digits, radices):
        x = x * rdx + dgt
    return x


def _to_base(v: int, base: int, length: int) -> list[int]:
    out = [0] * length
    for i in range(length - 1, -1, -1):
        v, out[i] = divmod(v, base)
    return out


def _initial_positions(plan: EncoderPlan, classes: Sequence[int]) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for k, c in enumerate(classes):
        groups.setdefault(c, []).append(k)
    return groups


def is_typical(plan: EncoderPlan, state: Sequence[int]) -> bool:
    if len(state) != plan.n_tracks:
        return False
    counts = np.bincount([plan.coding.class_of[v] for v in state], minlength=plan.coding.n)
    return bool(np.array_equal(counts, plan.d.r))


def encode_stage(plan: EncoderPlan, state: Sequence[int], bits) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """Map one stage of information bits to an output row and the next state.

    ``state`` holds the labeled-graph vertex of each of the ``N`` used tracks.
    The row has ``M`` labels; tracks beyond ``N`` repeat track 0.
    """
    bits = list(bits)
    if len(bits) != plan.bits_per_stage:
        raise ValueError(f"stage takes {plan.bits_per_stage} bits, got {len(bits)}")
    if not is_typical(plan, state):
        raise ValueError("state is not typical for this plan")
    digits = iter(_split_digits(bits_to_int(bits), plan.radices))
    red = plan.coding
    groups = _initial_positions(plan, [red.class_of[v] for v in state])
    codec = plan.codec

    for op in plan.ops:
        if isinstance(op, _Break):
            pos = groups.pop(op.group)
            ones = set(codec.encode_ones(op.n, op.k, next(digits)))
            groups[op.part] = [p for i, p in enumerate(pos) if i in ones]
            groups[op.rest] = [p for i, p in enumerate(pos) if i not in ones]
        else:
            groups[op.merged] = sorted(groups.pop(op.first) + groups.pop(op.second))

    dest = [0] * plan.n_tracks
    index = [0] * plan.n_tracks
    for fin in plan.finals:
        rem = groups.pop(fin.group)
        chosen = {}
        for j, c, _ in fin.dests[:-1]:
            ones = set(codec.encode_ones(len(rem), c, next(digits)))
            chosen[j] = [p for i, p in enumerate(rem) if i in ones]
            rem = [p for i, p in enumerate(rem) if i not in ones]
        chosen[fin.dests[-1][0]] = rem
        for j, c, a in fin.dests:
            for p in chosen[j]:
                dest[p] = j
            sel = []
            for ln in plan._parallel_blocks(c, a):
                sel += _to_base(next(digits), a, ln)
            for p, s in zip(chosen[j], sel):
                index[p] = s

    edges = [red.edges_into(v, dest[k])[index[k]] for k, v in enumerate(state)]
    g = plan.graph
    labels = [g.edges[e].label for e in edges]
    row = tuple(labels) + (labels[0],) * (plan.m_tracks - plan.n_tracks)
    return row, tuple(g.edges[e].target for e in edges)


def track_edges(plan: EncoderPlan, prev_rows: Sequence[Sequence[str]], row: Sequence[str]) -> list[int]:
    """Recover each used track's edge from the current row and up to ``memory`` rows before it.

    With fewer than ``memory`` previous rows the stage index is taken to be
    ``len(prev_rows)`` and the walk starts from the plan's fixed start state.
    """
    g = plan.graph
    m = plan.memory
    if len(prev_rows) >= m:
        window = list(prev_rows[len(prev_rows) - m:]) + [row]
        starts = None
    else:
        window = list(prev_rows) + [row]
        starts = plan.start
    out = []
    by_label = g.edge_by_label
    for k in range(plan.n_tracks):
        if starts is None:
            cand = list(g.edges_with_label.get(window[0][k], ()))
        else:
            e = by_label[starts[k]].get(window[0][k])
            cand = [] if e is None else [e]
        for lab_row in window[1:]:
            lab = lab_row[k]
            nxt = set()
            for e in cand:
                f = by_label[g.edges[e].target].get(lab)
                if f is not None:
                    nxt.add(f)
            cand = sorted(nxt)
        if len(cand) != 1:
            raise DecodeError(f"track {k}: {len(cand)} edges match the label window")
        out.append(cand[0])
    return out


def decode_edges(plan: EncoderPlan, edges: Sequence[int]) -> np.ndarray:
    """Information bits of one stage, given the edge taken by each used track."""
    g, red, codec = plan.graph, plan.coding, plan.codec
    if len(edges) != plan.n_tracks:
        raise DecodeError(f"expected {plan.n_tracks} track edges, got {len(edges)}")
    state = [g.edges[e].source for e in edges]
    if not is_typical(plan, state):
        raise DecodeError("stage does not start from a typical state")
    dest = [red.class_of[g.edges[e].target] for e in edges]
    index = [red.edges_into(v, dest[k]).index(edges[k]) for k, v in enumerate(state)]
    groups = _initial_positions(plan, [red.class_of[v] for v in state])
    digits: list[int] = []

    def pick(pos, wanted, k):
        ones = [i for i, p in enumerate(pos) if dest[p] in wanted]
        if len(ones) != k:
            raise DecodeError("stage edge is not typical")
        return ones

    for op in plan.ops:
        if isinstance(op, _Break):
            pos = groups.pop(op.group)
            ones = pick(pos, op.dests, op.k)
            digits.append(codec.decode_ones(op.n, op.k, ones))
            s = set(ones)
            groups[op.part] = [p for i, p in enumerate(pos) if i in s]
            groups[op.rest] = [p for i, p in enumerate(pos) if i not in s]
        else:
            groups[op.merged] = sorted(groups.pop(op.first) + groups.pop(op.second))

    for fin in plan.finals:
        rem = groups.pop(fin.group)
        chosen = {}
        for j, c, _ in fin.dests[:-1]:
            ones = pick(rem, (j,), c)
            digits.append(codec.decode_ones(len(rem), c, ones))
            s = set(ones)
            chosen[j] = [p for i, p in enumerate(rem) if i in s]
            rem = [p for i, p in enumerate(rem) if i not in s]
        last, c_last, _ = fin.dests[-1]
        if len(rem) != c_last or any(dest[p] != last for p in rem):
            raise DecodeError("stage edge is not typical")
        chosen[last] = rem
        for j, c, a in fin.dests:
            sel = [index[p] for p in chosen[j]]
            b = 0
            for ln in plan._parallel_blocks(c, a):
                v = 0
                for s in sel[b:b + ln]:
                    v = v * a + s
                digits.append(v)
                b += ln

    if len(digits) != len(plan.radices) or any(d >= r for d, r in zip(digits, plan.radices)):
        raise DecodeError("stage edge is outside the code")
    x = _join_digits(digits, plan.radices)
    if x >> plan.bits_per_stage:
        raise DecodeError("stage edge is outside the code")
    return int_to_bits(x, plan.bits_per_stage)


def decode_stage(plan: EncoderPlan, prev_rows: Sequence[Sequence[str]], row: Sequence[str]) -> np.ndarray:
    """Sliding-block decoder: bits of the stage that produced ``row``.

    Uses ``row`` and the ``memory`` rows before it (all available rows near
    the start of the array).
    """
    if len(row) < plan.n_tracks:
        raise DecodeError(f"row has {len(row)} tracks, need {plan.n_tracks}")
    return decode_edges(plan, track_edges(plan, prev_rows, row))


def encode_rows(plan: EncoderPlan, bits, n_stages: int | None = None) -> list[tuple[str, ...]]:
    """Encode consecutive stages starting from the plan's start state.

    ``bits`` is zero-padded to a whole number of stages.
    """
    bits = np.asarray(list(bits), dtype=np.uint8)
    b = plan.bits_per_stage
    if b == 0:
        raise ValueError("plan carries no information")
    if n_stages is None:
        n_stages = -(-len(bits) // b)
    if len(bits) > n_stages * b:
        raise ValueError(f"{len(bits)} bits do not fit in {n_stages} stages")
    bits = np.concatenate([bits, np.zeros(n_stages * b - len(bits), dtype=np.uint8)])
    state = plan.start
    rows = []
    for t in range(n_stages):
        row, state = encode_stage(plan, state, bits[t * b:(t + 1) * b])
        rows.append(row)
    return rows


def decode_rows(plan: EncoderPlan, rows: Sequence[Sequence[str]]) -> np.ndarray:
    m = plan.memory
    out = [decode_stage(plan, rows[max(0, t - m):t], rows[t]) for t in range(len(rows))]
    return np.concatenate(out) if out else np.zeros(0, dtype=np.uint8)
