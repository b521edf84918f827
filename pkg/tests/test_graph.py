import json

import numpy as np
import pytest

from rowcode.graph import (Edge, Graph, GraphError, LabeledGraph, diameter, dump_graph, is_irreducible,
                           load_graph, memory_of, running_example, shortest_path, validate_graph)
from rowcode.grid2d import SQUARE, build_strip_graph

from graphs import cycle_graph, shift_register


def test_running_example_adjacency():
    g = running_example()
    assert g.adjacency.tolist() == [[1, 1, 0], [1, 0, 1], [1, 0, 0]]
    assert is_irreducible(g)
    assert diameter(g) == 2
    assert validate_graph(g).ok


def test_adjacency_is_read_only():
    with pytest.raises(ValueError):
        running_example().adjacency[0, 0] = 5


def test_json_round_trip(tmp_path):
    g = running_example()
    path = tmp_path / "g.json"
    dump_graph(g, path)
    h = load_graph(path)
    assert h.names == g.names and h.edges == g.edges and h.alphabet == g.alphabet


def test_json_errors():
    doc = running_example().to_json()
    doc["edges"].append({"from": "alpha", "to": "nowhere", "label": "x"})
    with pytest.raises(GraphError):
        LabeledGraph.from_json(doc)
    with pytest.raises(GraphError):
        LabeledGraph.from_json({"vertices": ["a"]})


def test_nondeterministic_labeling_reported():
    g = LabeledGraph(["a", "b"], [Edge(0, 1, "x"), Edge(0, 0, "x"), Edge(1, 0, "y")])
    report = validate_graph(g)
    assert not report.ok
    assert any("nondeterministic" in v for v in report.violations)


def test_reducible_graph():
    g = Graph(["a", "b"], [(0, 1), (1, 1)])
    assert not is_irreducible(g)
    with pytest.raises(GraphError):
        diameter(g)


def test_edge_endpoint_checked():
    with pytest.raises(GraphError):
        Graph(["a"], [(0, 1)])


def test_shortest_path_prefers_small_indices():
    g = Graph.from_adjacency([[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [1, 0, 0, 0]])
    assert shortest_path(g, 0, 3) == [0, 1, 3]
    assert shortest_path(g, 3, 2) == [3, 0, 2]


def test_parallel_edges_counted():
    g = Graph.from_adjacency([[2, 1], [3, 0]])
    assert g.adjacency.tolist() == [[2, 1], [3, 0]]
    assert g.a_min_max() == (1, 3)
    assert len(g.out_edges[1]) == 3


@pytest.mark.parametrize("g, m", [
    (cycle_graph(4), 0),                        # every label used once
    (build_strip_graph(SQUARE, 4), 1),           # label is the entered vertex
    (shift_register(2), 2),
    (shift_register(3), 3),
])
def test_memory(g, m):
    assert memory_of(g) == m


def test_memory_infinite():
    # two self-loops with one label: the label sequence never reveals the vertex
    g = LabeledGraph(["a", "b"], [Edge(0, 0, "x"), Edge(1, 1, "x"), Edge(0, 1, "y"), Edge(1, 0, "z")])
    assert memory_of(g) is None
