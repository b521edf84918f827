import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rowcode.graph import GraphError, running_example
from rowcode.grid2d import SQUARE, build_strip_graph
from rowcode.reduction import check_stable, identity_reduction, lift_path, reduce, stable_partition
from rowcode.spectral import perron

from graphs import cycle_graph, planted_graph


def test_square_reductions():
    assert reduce(build_strip_graph(SQUARE, 9)).n == 34
    red = reduce(build_strip_graph(SQUARE, 4))
    assert check_stable(red)
    assert red.n < 8


def test_cycle_collapses():
    red = reduce(cycle_graph(6))
    assert red.n == 1
    assert red.graph.adjacency.tolist() == [[1]]


def test_running_example_is_already_reduced():
    red = reduce(running_example())
    assert red.n == 3
    assert red.class_of == (0, 1, 2)


def test_identity_reduction():
    g = running_example()
    red = identity_reduction(g)
    assert np.array_equal(red.graph.adjacency, g.adjacency)
    for k in range(len(g.edges)):
        assert red.lift_edge(g.edges[k].source, k) == k


def test_lift_rejects_bad_paths():
    g = build_strip_graph(SQUARE, 4)
    red = reduce(g)
    with pytest.raises(GraphError):
        lift_path(red, red.class_of[1], [], start_vertex=0) if red.class_of[1] != red.class_of[0] else \
            lift_path(red, 0, [len(red.graph.edges) - 1])


def test_lift_is_causal():
    g = build_strip_graph(SQUARE, 5)
    red = reduce(g)
    rng = random.Random(0)
    for _ in range(50):
        v = rng.randrange(g.n)
        path, c = [], red.class_of[v]
        for _ in range(6):
            e = rng.choice(red.graph.out_edges[c])
            path.append(e)
            c = red.graph.edges[e].target
        full = lift_path(red, red.class_of[v], path, start_vertex=v)
        for t in range(1, 6):
            assert lift_path(red, red.class_of[v], path[:t], start_vertex=v) == full[:t]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_reduction_preserves_perron(seed):
    g = planted_graph(random.Random(seed))
    red = reduce(g)
    assert check_stable(red)
    assert abs(perron(g.adjacency)[0] - perron(red.graph.adjacency)[0]) <= 1e-9
    assert red.n <= g.n
    # out-degree into each class is the reduced adjacency row
    for v in range(g.n):
        counts = [len(red.edges_into(v, c)) for c in range(red.n)]
        assert counts == red.graph.adjacency[red.class_of[v]].tolist()


def test_partition_level_reported():
    part = stable_partition(build_strip_graph(SQUARE, 9))
    assert part.level >= 1
    assert len(part.classes) == 34
