"""Encode random bits into a square-constrained array, damage it, decode what survives."""

import numpy as np

from rowcode import SQUARE, StripLayout, build_plan, build_strip_graph, encode_array
from rowcode.grid2d import array_to_text, check_constraint, decode_array_rows

wt, tracks, rows = 4, 20, 12
plan = build_plan(build_strip_graph(SQUARE, wt), tracks)
layout = StripLayout(wt, 1, tracks)
bits = np.random.default_rng(7).integers(0, 2, rows * plan.bits_per_stage)

arr = encode_array(bits, layout, plan, rows)
print(array_to_text(arr))
print("violations:", len(check_constraint(SQUARE, arr)))

arr[5, 3] ^= 1
b = plan.bits_per_stage
for t, res in enumerate(decode_array_rows(arr, layout, plan)):
    ok = not isinstance(res, Exception) and np.array_equal(res, bits[t * b:(t + 1) * b])
    print(f"row {t:2d}", "ok" if ok else "lost")
