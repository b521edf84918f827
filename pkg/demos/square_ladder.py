"""Normalized rate of the square constraint as strip width and track count grow."""

from rowcode import SQUARE, build_plan, build_strip_graph, capacity_bits, reduce

for wt in (2, 4, 6, 9):
    g = build_strip_graph(SQUARE, wt)
    cap = capacity_bits(g) / (wt + 1)
    line = [f"wt={wt}", f"|V|={g.n}", f"reduced={reduce(g).n}", f"cap={cap:.5f}"]
    for m in (100, 1000):
        plan = build_plan(g, m, reduced=True)
        line.append(f"M={m}:{plan.rate / (wt + 1):.5f}")
    print("  ".join(line))
