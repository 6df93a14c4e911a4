"""
A rotation set with infinitely many vertices
============================================

The ``prop55`` preset scores runs of symbols from two classes so that the
rotation vectors of the periodic orbits ``0...02`` and ``2...20`` trace two
sequences of vertices converging to ``(0, +-1/130)``. The slopes of the
chords towards the limit grow without bound, but only logarithmically.
"""

from pathlib import Path

import numpy as np

from rotground.files import label_vertices, polygon_svg
from rotground.geometry import rotation_polytope_periodic
from rotground.polygon_example import (
    example1_potential,
    predicted_vertices,
    preset,
    vertex_slope,
)

params = preset("prop55", depth=10)
table = example1_potential(params)
poly = rotation_polytope_periodic(table, max_period=9)

named = predicted_vertices(params, 9)
labels = label_vertices(poly, named)
for lab, (x, y) in zip(labels, poly.vertices):
    print(f"{lab:8s} ({x: .7f}, {y: .7f})")

# The three-block points w_i(3) are predicted but fall inside the hull.
print("inside:", [k for k in named if k not in labels])

# Chord slopes towards w_1(inf) grow like log j.
for j in (5, 10, 100, 10**3, 10**4, 10**5):
    print(f"slope at j = {j:>6d}: {vertex_slope(1, j, params):.4f}")

out = Path(__file__).with_name("_output")
out.mkdir(exist_ok=True)
(out / "prop55_polygon.svg").write_text(polygon_svg(poly, labels, overlay=named))
print("wrote", out / "prop55_polygon.svg")
