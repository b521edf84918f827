"""2-D layer: constraints, strip graphs, strip layout, array encode/decode."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import Edge, LabeledGraph


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint2D:
    """Shift-invariant 2-D constraint.

    ``violations(array)`` returns a list of offending coordinate tuples for an
    integer array whose entries index ``alphabet``.
    """

    name: str
    alphabet: tuple[str, ...]
    violations: Callable[[np.ndarray], list]

    def check(self, array) -> list:
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise ConstraintError("array must be two-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= len(self.alphabet)):
            raise ConstraintError("array has symbols outside the alphabet")
        return self.violations(arr)


def _square_violations(arr: np.ndarray) -> list:
    one = arr == 1
    out = []
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        rows, cols = arr.shape
        r0, r1 = 0, rows - dr
        c0, c1 = max(0, -dc), cols - max(0, dc)
        if r1 <= r0 or c1 <= c0:
            continue
        both = one[r0:r1, c0:c1] & one[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
        for r, c in np.argwhere(both):
            r, c = int(r) + r0, int(c) + c0
            out.append(((r, c), (r + dr, c + dc)))
    return sorted(out)


SQUARE = Constraint2D("square", ("0", "1"), _square_violations)

CONSTRAINTS = {"square": SQUARE}


def window_constraint(name: str, alphabet: Sequence[str], shape: tuple[int, int],
                      allowed: Callable[[np.ndarray], bool]) -> Constraint2D:
    """Constraint given by a predicate on every ``shape`` window (top-left corners reported)."""
    h, w = shape

    def violations(arr):
        out = []
        for r in range(arr.shape[0] - h + 1):
            for c in range(arr.shape[1] - w + 1):
                if not allowed(arr[r:r + h, c:c + w]):
                    out.append((r, c))
        return out

    return Constraint2D(name, tuple(alphabet), violations)


def check_constraint(c: Constraint2D, array) -> list:
    return c.check(array)


def build_strip_graph(c: Constraint2D, wt: int) -> LabeledGraph:
    """Graph whose paths spell exactly the width-``wt`` strips satisfying ``c``.

    Vertices are the legal rows (lexicographic order); ``u -> v`` when ``v`` may
    sit directly below ``u``; every edge is labeled by the row it enters.
    Assumes violations only involve two consecutive rows.
    """
    if wt < 1:
        raise ConstraintError("strip width must be positive")
    k = len(c.alphabet)
    rows = [np.array(r) for r in itertools.product(range(k), repeat=wt)]
    rows = [r for r in rows if not c.check(r[None, :])]
    names = ["".join(c.alphabet[s] for s in r) for r in rows]
    edges = []
    for i, u in enumerate(rows):
        for j, v in enumerate(rows):
            if not c.check(np.vstack([u, v])):
                edges.append(Edge(i, j, names[j]))
    return LabeledGraph(names, edges, sorted(set(names)))


def zero_merge(left, right, history) -> tuple[int, ...] | None:
    """Merging rule filling separator columns with symbol 0."""
    return None


@dataclass
class StripLayout:
    wt: int
    wm: int
    m_tracks: int
    constraint: Constraint2D = SQUARE
    merging_rule: Callable = zero_merge
    width: int | None = None

    def __post_init__(self):
        natural = self.m_tracks * (self.wt + self.wm) - self.wm
        if self.width is None:
            self.width = natural
        if (self.width + self.wm) // (self.wt + self.wm) != self.m_tracks:
            raise ConstraintError(
                f"width {self.width} does not hold exactly {self.m_tracks} strips"
            )

    @property
    def strip_columns(self) -> list[slice]:
        step = self.wt + self.wm
        return [slice(k * step, k * step + self.wt) for k in range(self.m_tracks)]

    def to_json(self) -> dict:
        doc = {"wt": self.wt, "wm": self.wm, "tracks": self.m_tracks, "constraint": self.constraint.name}
        if self.width != self.m_tracks * (self.wt + self.wm) - self.wm:
            doc["width"] = self.width
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "StripLayout":
        try:
            constraint = CONSTRAINTS[doc.get("constraint", "square")]
        except KeyError:
            raise ConstraintError(f"unknown constraint {doc.get('constraint')!r}") from None
        return cls(int(doc["wt"]), int(doc["wm"]), int(doc["tracks"]), constraint, width=doc.get("width"))


def assemble(track_rows: Sequence[str], layout: StripLayout, history=()) -> np.ndarray:
    """One full array row from the per-track labels of a stage.

    Separator columns come from ``layout.merging_rule(left, right, history)``
    (``None`` means all zero); unused trailing columns are zero.
    """
    if len(track_rows) != layout.m_tracks:
        raise ConstraintError(f"expected {layout.m_tracks} track rows, got {len(track_rows)}")
    index = {s: k for k, s in enumerate(layout.constraint.alphabet)}
    row = np.zeros(layout.width, dtype=np.int8)
    cols = layout.strip_columns
    strips = [np.array([index[ch] for ch in lab], dtype=np.int8) for lab in track_rows]
    for k, sl in enumerate(cols):
        row[sl] = strips[k]
        if layout.wm and k + 1 < len(cols):
            fill = layout.merging_rule(strips[k], strips[k + 1], history)
            if fill is not None:
                row[sl.stop:sl.stop + layout.wm] = fill
    return row


def split_row(row, layout: StripLayout) -> list[str]:
    alphabet = layout.constraint.alphabet
    return ["".join(alphabet[s] for s in row[sl]) for sl in layout.strip_columns]


def array_to_text(array, alphabet=("0", "1")) -> str:
    return "".join("".join(alphabet[s] for s in row) + "\n" for row in np.asarray(array))


def text_to_array(text: str, alphabet=("0", "1")) -> np.ndarray:
    index = {s: k for k, s in enumerate(alphabet)}
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        return np.zeros((0, 0), dtype=np.int8)
    if len({len(ln) for ln in lines}) != 1:
        raise ConstraintError("array rows have different lengths")
    try:
        return np.array([[index[ch] for ch in ln] for ln in lines], dtype=np.int8)
    except KeyError as exc:
        raise ConstraintError(f"symbol {exc} not in alphabet") from None


def _check_pairing(layout: StripLayout, plan) -> None:
    if plan.m_tracks != layout.m_tracks:
        raise ConstraintError(f"plan has {plan.m_tracks} tracks, layout {layout.m_tracks}")
    alphabet = set(layout.constraint.alphabet)
    for lab in plan.graph.alphabet:
        if len(lab) != layout.wt or not set(lab) <= alphabet:
            raise ConstraintError(f"graph label {lab!r} is not a width-{layout.wt} strip row")


def encode_array(bits, layout: StripLayout, plan, n_rows: int) -> np.ndarray:
    """Encode ``n_rows * plan.bits_per_stage`` bits into an ``n_rows x width`` array."""
    from .parallel import encode_rows

    _check_pairing(layout, plan)
    bits = np.asarray(list(bits), dtype=np.uint8)
    if len(bits) != n_rows * plan.bits_per_stage:
        raise ValueError(f"need {n_rows * plan.bits_per_stage} bits for {n_rows} rows, got {len(bits)}")
    out = np.zeros((n_rows, layout.width), dtype=np.int8)
    if n_rows == 0:
        return out
    history: list[np.ndarray] = []
    for t, row in enumerate(encode_rows(plan, bits, n_rows)):
        out[t] = assemble(row, layout, history[-plan.memory:] if plan.memory else [])
        history.append(out[t])
    return out


def decode_array_rows(array, layout: StripLayout, plan) -> list:
    """Per-row bits, or the :class:`DecodeError` raised for that row.

    Row ``t`` is decoded from rows ``t - m .. t`` only, so a damaged row
    affects at most the ``m + 1`` rows starting there.
    """
    from .parallel import DecodeError, decode_stage

    _check_pairing(layout, plan)
    arr = np.asarray(array)
    if arr.ndim != 2 or (len(arr) and arr.shape[1] != layout.width):
        raise ConstraintError(f"array must have width {layout.width}")
    rows = [split_row(r, layout) for r in arr]
    m = plan.memory
    out = []
    for t in range(len(rows)):
        try:
            out.append(decode_stage(plan, rows[max(0, t - m):t], rows[t]))
        except DecodeError as exc:
            out.append(exc)
    return out


def decode_array(array, layout: StripLayout, plan) -> np.ndarray:
    from .parallel import DecodeError

    per_row = decode_array_rows(array, layout, plan)
    bad = [t for t, r in enumerate(per_row) if isinstance(r, Exception)]
    if bad:
        raise DecodeError(f"rows {bad} could not be decoded")
    return np.concatenate(per_row) if per_row else np.zeros(0, dtype=np.uint8)


def information_density(plan, layout: StripLayout) -> float:
    """Bits per array symbol actually carried: stage bits over row width."""
    return plan.bits_per_stage / layout.width
