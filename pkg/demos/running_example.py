"""Walk through the three-vertex running example: chain, design, one stage of coding."""

import numpy as np

from rowcode import build_plan, capacity_bits, decode_stage, encode_stage, maxentropic_chain, running_example

g = running_example()
chain = maxentropic_chain(g)
print("capacity  ", round(capacity_bits(g), 5))
print("pi        ", np.round(chain.stationary, 5))
print("Q\n", np.round(chain.transition, 5))

plan = build_plan(g, 12)
print("D\n", plan.d.d)
print("N =", plan.n_tracks, " memory =", plan.memory, " bits/stage =", plan.bits_per_stage)

rng = np.random.default_rng(1)
state, rows = plan.start, []
for t in range(4):
    bits = rng.integers(0, 2, plan.bits_per_stage)
    row, state = encode_stage(plan, state, bits)
    back = decode_stage(plan, rows[-plan.memory:], row)
    rows.append(row)
    print(t, " ".join(row), "ok" if np.array_equal(back, bits) else "MISMATCH")
