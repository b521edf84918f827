"""Acceptance suite: one test per criterion, each printing a single verdict line."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from rowcode.enumerative import EnumTables, FastCodec, correction_factor, exact_binom, roundoff_bounds
from rowcode.graph import Edge, Graph, LabeledGraph, running_example
from rowcode.grid2d import SQUARE, StripLayout, build_strip_graph, decode_array, encode_array, split_row
from rowcode.markov_type import CyclicCoder, ListCollection, list_count, oriented_tree
from rowcode.parallel import (build_break_merge_plan, build_plan, decode_stage, rate, typical_count,
                              typical_count_bm)
from rowcode.quantize import (design_multiplicity, good_quantization, multiplicity_matrix,
                              quantization_violations, target_matrix, validate_multiplicity, QuantizedMatrix)
from rowcode.reduction import lift_path, reduce
from rowcode.spectral import capacity_bits, maxentropic_chain, perron

from graphs import planted_graph

REF_PI = np.array([0.619, 0.282, 0.099])
REF_Q = np.array([[0.544, 0.456, 0], [0.647, 0, 0.353], [1, 0, 0]])
REF_P_TILDE = np.array([[4, 2, 0], [2, 0, 1], [0, 0, 0]])
REF_D = np.array([[4, 3, 0], [2, 0, 1], [1, 0, 0]])


def verdict(n: int, failures: list, detail: str) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"criterion {n}: {status}  {detail}" + (f"  failed: {failures}" if failures else ""))
    assert not failures, failures


# -------------------------------------------------------------- 1


@pytest.mark.criterion(1)
def test_running_example_pipeline():
    t0 = time.perf_counter()
    g = running_example()
    ch = maxentropic_chain(g)
    t = target_matrix(g, ch, 12)
    q = good_quantization(t)
    d = design_multiplicity(g, ch, 12)
    elapsed = time.perf_counter() - t0

    fails = []
    if t.m_prime != 9:
        fails.append(f"M'={t.m_prime}")
    pi_err = np.abs(ch.stationary - REF_PI).max()
    q_err = np.abs(ch.transition - REF_Q).max()
    if pi_err > 5e-4:
        fails.append(f"pi off by {pi_err:.2e}")
    if q_err > 5e-4:
        fails.append(f"Q off by {q_err:.2e}")
    if quantization_violations(t, q):
        fails.append("computed P~ not a good quantization")
    if quantization_violations(t, QuantizedMatrix(REF_P_TILDE)):
        fails.append("reference P~ rejected")
    if validate_multiplicity(g, 12, d) or np.any(d.d < q.p_tilde) or not 9 <= d.n_tracks_used <= 12:
        fails.append("computed D invalid")
    ref = multiplicity_matrix(g, QuantizedMatrix(REF_P_TILDE), 12)
    if validate_multiplicity(g, 12, REF_D) or not np.array_equal(ref.d, REF_D):
        fails.append("reference D rejected")
    if elapsed >= 1.0:
        fails.append(f"took {elapsed:.2f}s")
    verdict(1, fails, f"M'={t.m_prime} N={d.n_tracks_used} |dpi|={pi_err:.1e} |dQ|={q_err:.1e} {elapsed:.3f}s")


# -------------------------------------------------------------- 2


def brute_force_typical_edges(g: Graph, d: np.ndarray) -> int:
    r = d.sum(axis=1)
    state = [i for i in range(g.n) for _ in range(int(r[i]))]
    count = 0
    for choice in itertools.product(*(g.out_edges[v] for v in state)):
        m = np.zeros_like(d)
        for e in choice:
            m[g.edges[e].source, g.edges[e].target] += 1
        count += np.array_equal(m, d)
    return count


@pytest.mark.criterion(2)
def test_delta_and_rate_running_example():
    g = running_example()
    delta = typical_count(g, REF_D)
    brute = brute_force_typical_edges(g, REF_D)
    r = rate(delta, 12)
    fails = []
    if delta != 105 or brute != 105:
        fails.append(f"delta={delta} brute={brute}")
    if Fraction(r).limit_denominator(100) != Fraction(6, 12):
        fails.append(f"rate={r}")
    verdict(2, fails, f"delta={delta} brute-force={brute} R={r}")


# -------------------------------------------------------------- 3


@pytest.mark.criterion(3)
def test_square_ladder():
    wt, wm, m = 9, 1, 10_000
    g = build_strip_graph(SQUARE, wt)
    norm_cap = capacity_bits(g) / (wt + wm)
    base = build_plan(g, m)
    red = build_plan(g, m, reduced=True)
    bm = build_plan(g, m, reduced=True, break_merge=True)
    r0, r1, r2 = (p.rate / (wt + wm) for p in (base, red, bm))
    fails = []
    if g.n != 89:
        fails.append(f"|V|={g.n}")
    if red.coding.n != 34:
        fails.append(f"reduced |V|={red.coding.n}")
    if abs(norm_cap - 0.402) > 0.001:
        fails.append(f"normalized capacity {norm_cap:.5f}")
    if not 0.376 <= r0 <= 0.386:
        fails.append(f"baseline {r0:.5f}")
    if r1 < 0.388:
        fails.append(f"reduced {r1:.5f}")
    if r2 < 0.392:
        fails.append(f"break-merge {r2:.5f}")
    verdict(3, fails, f"|V|={g.n}->{red.coding.n} cap={norm_cap:.5f} rates {r0:.5f} {r1:.5f} {r2:.5f}")


# -------------------------------------------------------------- 4


def break_merge_example():
    # alpha, beta and their successors; D holds only the two displayed rows
    names = ["alpha", "beta", "epsilon", "zeta", "theta", "delta"]
    al, be, ep, ze, th, de = range(6)
    out = {al: [(ep, 1, 5), (th, 2, 4), (de, 1, 3)], be: [(ze, 1, 2), (th, 2, 9), (de, 1, 7)]}
    edges, d = [], np.zeros((6, 6), dtype=np.int64)
    for u, lst in out.items():
        for v, a, c in lst:
            edges += [Edge(u, v, f"{names[v]}{k}") for k in range(a)]
            d[u, v] = c
    for v in (ep, ze, th, de):
        edges.append(Edge(v, al, "alpha0"))
    return LabeledGraph(names, edges), d


@pytest.mark.criterion(4)
def test_break_merge_worked_example():
    g, d = break_merge_example()
    base = typical_count(g, d)
    plan = build_break_merge_plan(g, d)
    improved = typical_count_bm(g, d, plan)
    f = math.factorial
    base_ref = f(12) * 2**4 // (f(5) * f(4) * f(3)) * (f(18) * 2**9 // (f(2) * f(9) * f(7)))
    impr_ref = math.comb(12, 5) * math.comb(18, 2) * (f(23) * 2**13 // (f(13) * f(10)))
    fails = []
    if base != base_ref or improved != impr_ref:
        fails.append(f"counts {base} {improved} vs {base_ref} {impr_ref}")
    if round(base / 1e14, 2) != 3.97:
        fails.append(f"baseline/1e14 = {base / 1e14:.4f}")
    if round(improved / 1e15, 2) != 1.14:
        fails.append(f"improved/1e15 = {improved / 1e15:.4f}")
    verdict(4, fails, f"baseline={base} ({base / 1e14:.3f}e14) improved={improved} ({improved / 1e15:.3f}e15)")


# -------------------------------------------------------------- 5


@pytest.mark.criterion(5)
def test_enumerative_codec():
    mu, n_max = 24, 200
    t0 = time.perf_counter()
    tables = EnumTables(n_max, n_max, mu)
    codec = FastCodec(tables)
    rng = random.Random(5)
    roundtrip_bad, bound_bad, loss_bad, worst_excess = [], [], [], 0.0
    for n in range(n_max + 1):
        for delta in range(n + 1):
            count = codec.count(n, delta)
            for _ in range(100):
                psi = rng.randrange(count)
                if codec.decode_ones(n, delta, codec.encode_ones(n, delta, psi)) != psi:
                    roundtrip_bad.append((n, delta, psi))
            b = roundoff_bounds(n, delta, mu)
            fb = tables.f_binom(n, delta).to_fraction()
            if not b.lower <= fb <= b.upper or count != math.ceil(fb):
                bound_bad.append((n, delta))
            exact = exact_binom(n, delta)
            loss = math.log2(exact) - math.log2(count)
            allowed = -math.log2(correction_factor(delta, mu))
            if loss > allowed:
                loss_bad.append((n, delta))
                worst_excess = max(worst_excess, float(Fraction(exact) * correction_factor(delta, mu) / count - 1))
    elapsed = time.perf_counter() - t0
    fails = []
    if roundtrip_bad:
        fails.append(f"{len(roundtrip_bad)} round-trip errors, first {roundtrip_bad[0]}")
    if bound_bad:
        fails.append(f"{len(bound_bad)} (n, delta) outside the roundoff bounds, first {bound_bad[0]}")
    if loss_bad:
        fails.append(f"rate loss above -log2 f(delta) for {len(loss_bad)} (n, delta) pairs, "
                     f"first {loss_bad[0]}, worst relative excess {worst_excess:.2e}")
    if elapsed >= 120:
        fails.append(f"took {elapsed:.1f}s")
    verdict(5, fails, f"n<={n_max} all delta, 100 psi each, {elapsed:.1f}s")


# -------------------------------------------------------------- 6


@pytest.mark.criterion(6)
def test_convergence_property():
    g = running_example()
    ch = maxentropic_chain(g)
    cap = capacity_bits(g)
    ms = [100, 1000, 10_000]
    gaps = [cap - rate(typical_count(g, design_multiplicity(g, ch, m)), m) for m in ms]
    consts = [gap * m / (g.n**2 * math.log(m)) for gap, m in zip(gaps, ms)]
    c_fit = max(consts)
    fails = []
    if not all(x > 0 for x in gaps):
        fails.append("non-positive gap")
    if not all(a > b for a, b in zip(gaps, gaps[1:])):
        fails.append("gap not strictly decreasing")
    if any(gap > c_fit * g.n**2 * math.log(m) / m for gap, m in zip(gaps, ms)):
        fails.append("bound violated")
    if max(consts) / min(consts) > 3:
        fails.append(f"fitted constants drift: {consts}")
    verdict(6, fails, "gaps " + " ".join(f"{x:.3e}" for x in gaps) + "  C_M " + " ".join(f"{c:.3f}" for c in consts))


# -------------------------------------------------------------- 7


def all_list_collections(g, d, tree):
    per_vertex = []
    for i in range(g.n):
        items = [j for j in range(g.n) for _ in range(int(d[i, j]))]
        perms = set(itertools.permutations(items))
        if i != tree.root and items:
            perms = {p for p in perms if p[-1] == tree.parent[i]}
        per_vertex.append(sorted(perms))
    return [ListCollection(tuple(c), {}) for c in itertools.product(*per_vertex)]


@pytest.mark.criterion(7)
def test_cyclic_encoder_running_example():
    g = running_example()
    tree = oriented_tree(g, 0)
    coder = CyclicCoder(g, REF_D, tree)
    collections = all_list_collections(g, REF_D, tree)
    fails = []
    if list_count(g, REF_D, tree) != 70 or len(collections) != 70 or coder.bits != 6:
        fails.append(f"count {coder.count}, brute force {len(collections)}, bits {coder.bits}")
    words = set()
    for x in range(2**coder.bits):
        bits = [int(c) for c in format(x, "06b")]
        word = coder.encode(bits)
        words.add(word)
        v, use = 0, np.zeros_like(REF_D)
        for lab in word:
            e = g.edge_by_label[v][lab]
            use[v, g.edges[e].target] += 1
            v = g.edges[e].target
        if len(word) != 11 or v != 0 or not np.array_equal(use, REF_D):
            fails.append(f"input {x}: bad path")
        if list(coder.decode(word)) != bits:
            fails.append(f"input {x}: round trip")
    if len(words) != 64:
        fails.append(f"{len(words)} distinct words")
    stuck = 0
    for lc in collections:
        try:
            coder.walk(lc)
        except Exception:
            stuck += 1
    if stuck:
        fails.append(f"{stuck} list collections get stuck")
    verdict(7, fails, f"delta_T={coder.count} brute-force={len(collections)} 64 inputs ok, 0 stuck of {len(collections)}")


# -------------------------------------------------------------- 8


@pytest.mark.criterion(8)
def test_reduction_correctness():
    rng = random.Random(8)
    graphs = [build_strip_graph(SQUARE, 4), build_strip_graph(SQUARE, 9)]
    graphs += [planted_graph(rng) for _ in range(50)]
    fails = []
    worst = 0.0
    for k, g in enumerate(graphs):
        red = reduce(g)
        diff = abs(perron(g.adjacency)[0] - perron(red.graph.adjacency)[0])
        worst = max(worst, diff)
        if diff > 1e-9:
            fails.append(f"graph {k}: perron differs by {diff:.2e}")

    g = graphs[0]
    red = reduce(g)
    checked = 0
    for v in range(g.n):
        for length in range(1, 5):
            lifted = set()
            paths = [[]]
            for _ in range(length):
                paths = [p + [e] for p in paths
                         for e in red.graph.out_edges[red.graph.edges[p[-1]].target if p else red.class_of[v]]]
            for p in paths:
                orig = tuple(lift_path(red, red.class_of[v], p, start_vertex=v))
                if [red.project_edge(e) for e in orig] != p:
                    fails.append(f"lift/project mismatch at {v}, {p}")
                lifted.add(orig)
            orig_paths = [[]]
            for _ in range(length):
                orig_paths = [q + [e] for q in orig_paths
                              for e in g.out_edges[g.edges[q[-1]].target if q else v]]
            if len(lifted) != len(paths) or lifted != {tuple(q) for q in orig_paths}:
                fails.append(f"lifting from {v} at length {length} is not a bijection")
            checked += len(paths)
    verdict(8, fails[:5], f"{len(graphs)} graphs, max |dPerron|={worst:.1e}, {checked} reduced paths lifted")


# -------------------------------------------------------------- 9


@pytest.mark.criterion(9)
def test_end_to_end_2d():
    layout = StripLayout(4, 1, 5)
    g = build_strip_graph(SQUARE, 4)
    plan = build_plan(g, 5)
    rows_per_msg = 32
    rng = np.random.default_rng(9)
    fails = []
    violations = 0
    for msg in range(1000):
        bits = rng.integers(0, 2, rows_per_msg * plan.bits_per_stage).astype(np.uint8)
        arr = encode_array(bits, layout, plan, rows_per_msg)
        violations += len(SQUARE.check(arr))
        back = decode_array(arr, layout, plan)
        if not np.array_equal(back, bits):
            fails.append(f"message {msg}: bits differ")
        if msg % 50 == 0:
            rows = [split_row(r, layout) for r in arr]
            b = plan.bits_per_stage
            for t in range(1, rows_per_msg):
                if not np.array_equal(decode_stage(plan, rows[t - 1:t], rows[t]), back[t * b:(t + 1) * b]):
                    fails.append(f"message {msg} row {t}: window decode differs")
    if violations:
        fails.append(f"{violations} constraint violations")
    if plan.memory != 1:
        fails.append(f"memory {plan.memory}")
    verdict(9, fails[:5], f"1000 messages x {rows_per_msg} rows, {plan.bits_per_stage} bits/row, "
                          f"{violations} violations, memory {plan.memory}")
