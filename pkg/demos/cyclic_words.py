"""Closed words with prescribed edge counts, coded through list collections."""

import numpy as np

from rowcode import CyclicCoder, oriented_tree, running_example
from rowcode.quantize import design_multiplicity
from rowcode.spectral import maxentropic_chain

g = running_example()
d = design_multiplicity(g, maxentropic_chain(g), 60)
coder = CyclicCoder(g, d, oriented_tree(g))
print("D\n", coder.d)
print("list collections:", coder.count, " bits:", coder.bits)

bits = np.random.default_rng(3).integers(0, 2, coder.bits)
word = coder.encode(bits)
print(" ".join(word))
assert np.array_equal(coder.decode(word), bits)
print("decoded ok")
