"""
Entropy at a prescribed rotation vector
=======================================

The largest entropy of a measure with rotation vector ``w`` is found by
minimizing the convex dual ``P(v . Phi) - v . w``. For the coin potential
the answer is the binary entropy of ``w``.
"""

import numpy as np

from rotground import PotentialTable, localized_entropy
from rotground.geometry import rotation_polytope_periodic

coin = PotentialTable(2, 1, [[0.0], [1.0]])
for w in (0.1, 0.25, 0.5, 0.75, 0.9):
    res = localized_entropy(coin, [w])
    exact = -w * np.log(w) - (1 - w) * np.log(1 - w)
    print(f"w = {w:.2f}  H = {res.value:.10f}  exact = {exact:.10f}  v* = {res.multiplier[0]: .6f}")

# A planar example: a random range-2 potential on three symbols.
table = PotentialTable(3, 2, np.random.default_rng(4).normal(size=(9, 2)))
poly = rotation_polytope_periodic(table, 8)
center = poly.vertices.mean(axis=0)
for s in (0.0, 0.5, 0.9):
    w = center + s * (poly.vertices[0] - center)
    res = localized_entropy(table, w)
    print(f"s = {s:.1f}  H = {res.value:.8f}  residual = {res.residual:.1e}  solves = {res.solves}")
