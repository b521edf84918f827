"""Fixed-rate parallel encoders for 1-D and 2-D constrained systems."""

from .enumerative import EnumTables, ExactCodec, FastCodec, SoftFloat
from .graph import Edge, Graph, GraphError, LabeledGraph, load_graph, running_example
from .grid2d import SQUARE, StripLayout, build_strip_graph, decode_array, encode_array
from .markov_type import CyclicCoder, list_count, oriented_tree
from .parallel import DecodeError, EncoderPlan, build_plan, decode_stage, encode_stage, rate, typical_count
from .quantize import MultiplicityMatrix, design_multiplicity
from .reduction import reduce
from .spectral import capacity_bits, maxentropic_chain

__all__ = [
    "EnumTables", "ExactCodec", "FastCodec", "SoftFloat",
    "Edge", "Graph", "GraphError", "LabeledGraph", "load_graph", "running_example",
    "SQUARE", "StripLayout", "build_strip_graph", "decode_array", "encode_array",
    "CyclicCoder", "list_count", "oriented_tree",
    "DecodeError", "EncoderPlan", "build_plan", "decode_stage", "encode_stage", "rate", "typical_count",
    "MultiplicityMatrix", "design_multiplicity", "reduce",
    "capacity_bits", "maxentropic_chain",
]
