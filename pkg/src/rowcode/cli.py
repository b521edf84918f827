"""Command-line front end.

Every subcommand prints one JSON document on stdout.  Exit status: 0 on
success, 1 on usage errors, 2 when the data fails to decode or verify.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time

import numpy as np

from .enumerative import EnumTables, FastCodec
from .graph import GraphError, LabeledGraph, diameter, load_graph
from .grid2d import (CONSTRAINTS, ConstraintError, StripLayout, array_to_text, build_strip_graph,
                     decode_array_rows, encode_array, text_to_array)
from .markov_type import CyclicCoder, oriented_tree
from .parallel import DecodeError, EncoderPlan, build_plan
from .quantize import good_quantization, reserved_tracks, target_matrix
from .reduction import reduce
from .spectral import capacity_bits, maxentropic_chain

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
BIG_INT_DIGITS = 4000  # print big counts in full only below this many digits


class UsageError(Exception):
    pass


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def _graph(args) -> LabeledGraph:
    if args.graph and args.wt:
        raise UsageError("give either --graph or --wt, not both")
    if args.graph:
        return load_graph(args.graph)
    if args.wt:
        return build_strip_graph(CONSTRAINTS[args.constraint], args.wt)
    raise UsageError("one of --graph or --wt is required")


def _read_bits(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        text = "".join(fh.read().split())
    if set(text) - {"0", "1"}:
        raise UsageError(f"{path}: bits file may only contain '0' and '1'")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def _write_bits(path, bits) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(map(str, bits)) + "\n")


def _count_doc(x: int) -> dict:
    doc = {"log2": math.log2(x) if x else None, "floor_log2": x.bit_length() - 1 if x else None}
    if x and math.log10(x) < BIG_INT_DIGITS:
        doc["value"] = str(x)
    return doc


# ---------------------------------------------------------------- subcommands


def cmd_capacity(args) -> int:
    g = _graph(args)
    cap = capacity_bits(g)
    doc = {"vertices": g.n, "edges": len(g.edges), "capacity": cap}
    if args.wt:
        doc["normalized_capacity"] = cap / (args.wt + args.wm)
    if args.reduce:
        doc["reduced_vertices"] = reduce(g).n
    _emit(doc)
    return EXIT_OK


def cmd_plan(args) -> int:
    g = _graph(args)
    plan = build_plan(g, args.tracks, reduced=args.reduce, break_merge=args.break_merge,
                      mu=args.mu, eps=args.eps, exact=args.exact, eta=args.eta)
    coding = plan.coding.graph
    chain = maxentropic_chain(coding)
    doc = {
        "tracks": args.tracks,
        "vertices": g.n,
        "coding_vertices": coding.n,
        "diameter": diameter(coding),
        "memory": plan.memory,
        "capacity": capacity_bits(g),
        "pi": chain.stationary.tolist(),
        "Q": chain.transition.tolist(),
        "D": plan.d.d.tolist(),
        "N": plan.n_tracks,
        "delta": _count_doc(plan.delta),
        "rate": plan.rate,
        "bits_per_stage": plan.bits_per_stage,
        "break_merge_steps": len(plan.bm),
    }
    if args.tracks > reserved_tracks(coding):
        t = target_matrix(coding, chain, args.tracks)
        doc["M_prime"] = t.m_prime
        doc["P"] = t.p.tolist()
        doc["P_tilde"] = good_quantization(t).p_tilde.tolist()
    if args.wt:
        doc["normalized_rate"] = plan.rate / (args.wt + args.wm)
    if args.out:
        body = plan.to_json()
        if args.wt:
            body["layout"] = StripLayout(args.wt, args.wm, args.tracks, CONSTRAINTS[args.constraint]).to_json()
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(body, fh)
    _emit(doc)
    return EXIT_OK


def _load_plan(path) -> tuple[EncoderPlan, StripLayout]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "layout" not in doc:
        raise UsageError(f"{path} has no strip layout; build it with 'plan --wt'")
    return EncoderPlan.from_json(doc), StripLayout.from_json(doc["layout"])


def cmd_encode(args) -> int:
    plan, layout = _load_plan(args.plan)
    b = plan.bits_per_stage
    if args.input:
        bits = _read_bits(args.input)
        rows = args.rows if args.rows is not None else -(-len(bits) // b)
        if len(bits) > rows * b:
            raise UsageError(f"{len(bits)} bits do not fit in {rows} rows of {b} bits")
        bits = np.concatenate([bits, np.zeros(rows * b - len(bits), dtype=np.uint8)])
    else:
        rows = args.rows if args.rows is not None else 8
        bits = np.random.default_rng(args.seed).integers(0, 2, rows * b).astype(np.uint8)
        if args.bits_out:
            _write_bits(args.bits_out, bits)
    arr = encode_array(bits, layout, plan, rows)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(array_to_text(arr, layout.constraint.alphabet))
    _emit({"rows": rows, "width": layout.width, "bits": len(bits),
           "density": len(bits) / arr.size if arr.size else 0.0})
    return EXIT_OK


def cmd_decode(args) -> int:
    plan, layout = _load_plan(args.plan)
    with open(args.input, encoding="utf-8") as fh:
        arr = text_to_array(fh.read(), layout.constraint.alphabet)
    per_row = decode_array_rows(arr, layout, plan)
    bad = [t for t, r in enumerate(per_row) if isinstance(r, Exception)]
    if bad:
        for t in bad:
            print(f"row {t}: {per_row[t]}", file=sys.stderr)
        _emit({"rows": len(per_row), "failed_rows": bad})
        return EXIT_DATA
    bits = np.concatenate(per_row) if per_row else np.zeros(0, dtype=np.uint8)
    _write_bits(args.output, bits)
    _emit({"rows": len(per_row), "bits": len(bits)})
    return EXIT_OK


def _cyclic(args) -> CyclicCoder:
    from .quantize import design_multiplicity

    g = _graph(args)
    d = design_multiplicity(g, maxentropic_chain(g), args.tracks)
    return CyclicCoder(g, d, oriented_tree(g, args.root))


def cmd_encode1d(args) -> int:
    coder = _cyclic(args)
    if args.input:
        bits = _read_bits(args.input)
    else:
        bits = np.random.default_rng(args.seed).integers(0, 2, coder.bits).astype(np.uint8)
        if args.bits_out:
            _write_bits(args.bits_out, bits)
    if len(bits) != coder.bits:
        raise UsageError(f"encoder takes exactly {coder.bits} bits, got {len(bits)}")
    word = coder.encode(bits)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(" ".join(word) + "\n")
    _emit({"bits": coder.bits, "length": len(word), "D": coder.d.tolist(),
           "list_count": _count_doc(coder.count)})
    return EXIT_OK


def cmd_decode1d(args) -> int:
    coder = _cyclic(args)
    with open(args.input, encoding="utf-8") as fh:
        word = fh.read().split()
    bits = coder.decode(word)
    _write_bits(args.output, bits)
    _emit({"bits": len(bits), "length": len(word)})
    return EXIT_OK


def cmd_check(args) -> int:
    c = CONSTRAINTS[args.constraint]
    with open(args.input, encoding="utf-8") as fh:
        arr = text_to_array(fh.read(), c.alphabet)
    bad = c.check(arr)
    _emit({"constraint": c.name, "shape": list(arr.shape), "violations": [list(map(list, v)) for v in bad]})
    return EXIT_DATA if bad else EXIT_OK


def cmd_bench(args) -> int:
    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    codec = FastCodec(EnumTables(args.n, args.n, args.mu, args.eps))
    t_tables = time.perf_counter() - t0
    words, ones, failures = 0, 0, 0
    t0 = time.perf_counter()
    for _ in range(args.samples):
        delta = rng.randint(0, args.n)
        psi = rng.randrange(codec.count(args.n, delta))
        pos = codec.encode_ones(args.n, delta, psi)
        failures += codec.decode_ones(args.n, delta, pos) != psi
        words += 1
        ones += delta
    elapsed = time.perf_counter() - t0
    _emit({"n": args.n, "mu": args.mu, "samples": words, "table_seconds": t_tables,
           "seconds": elapsed, "us_per_one": 1e6 * elapsed / max(ones, 1), "failures": failures})
    return EXIT_DATA if failures else EXIT_OK


# ---------------------------------------------------------------- parser


def _graph_opts(p):
    p.add_argument("--graph", help="labeled graph JSON file")
    p.add_argument("--wt", type=int, help="build the strip graph of this width instead")
    p.add_argument("--wm", type=int, default=1, help="merging-strip width (default 1)")
    p.add_argument("--constraint", default="square", choices=sorted(CONSTRAINTS))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rowcode", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity and normalized capacity")
    _graph_opts(p)
    p.add_argument("--reduce", action="store_true", help="also report the reduced vertex count")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("plan", help="multiplicity matrix, typical count and rate")
    _graph_opts(p)
    p.add_argument("--tracks", type=int, required=True)
    p.add_argument("--reduce", action="store_true")
    p.add_argument("--break-merge", action="store_true")
    p.add_argument("--mu", type=int, default=24)
    p.add_argument("--eps", type=int, default=32)
    p.add_argument("--eta", type=int, default=None, help="block size for parallel-edge coding")
    p.add_argument("--exact", action="store_true", help="exact binomials instead of the fast codec")
    p.add_argument("--out", help="write the encoder plan JSON here")
    p.set_defaults(func=cmd_plan)

    for name, func, what in (("encode", cmd_encode, "bits -> array"), ("decode", cmd_decode, "array -> bits")):
        p = sub.add_parser(name, help=what)
        p.add_argument("--plan", required=True, help="plan JSON written by 'plan --wt ... --out'")
        p.add_argument("--input", required=(name == "decode"))
        p.add_argument("--output", required=True)
        if name == "encode":
            p.add_argument("--rows", type=int, default=None)
            p.add_argument("--seed", type=int, default=0, help="seed for random input when --input is absent")
            p.add_argument("--bits-out", help="save the random input bits here")
        p.set_defaults(func=func)

    for name, func in (("encode1d", cmd_encode1d), ("decode1d", cmd_decode1d)):
        p = sub.add_parser(name, help="closed-path code with prescribed edge counts")
        _graph_opts(p)
        p.add_argument("--tracks", type=int, required=True)
        p.add_argument("--root", type=int, default=0)
        p.add_argument("--input", required=(name == "decode1d"))
        p.add_argument("--output", required=True)
        if name == "encode1d":
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--bits-out")
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="verify an array against a 2-D constraint")
    p.add_argument("--input", required=True)
    p.add_argument("--constraint", default="square", choices=sorted(CONSTRAINTS))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="time the fast enumerative codec")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--mu", type=int, default=24)
    p.add_argument("--eps", type=int, default=32)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    for opt in ("tracks", "wt", "n", "samples", "rows"):
        v = getattr(args, opt, None)
        if v is not None and v < (0 if opt == "rows" else 1):
            print(f"rowcode: --{opt} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rowcode: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DecodeError, ConstraintError, GraphError, ValueError, OSError) as exc:
        print(f"rowcode: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
