"""
A non-ergodic ground state
==========================

Pushing the ``prop56`` preset towards the left face of its rotation set
(direction ``(-1, 0)``) freezes the equilibrium states onto the two runs of
pure class-1 and pure class-2 words. The limit is the even mixture of two
full 2-shifts: entropy ``log 2``, rotation vector ``(0, 0)``.
"""

import numpy as np

from rotground.annealing import AnnealOptions, ground_state, verify_face_limit
from rotground.polygon_example import example1_potential, preset

table = example1_potential(preset("prop56", depth=10))
report = ground_state(table, [-1.0, 0.0], AnnealOptions(t_max=400, stop_on_convergence=False))

for e in report.trace.entries:
    print(f"t = {e.t:8.2f}  rv = ({e.rv[0]: .3e}, {e.rv[1]: .1e})  entropy = {e.entropy:.12f}")

print("closed classes:", [len(c.states) for c in report.closed_classes])
print("weights:", report.closed_class_weights)
print("log 2 =", np.log(2))

for finding in verify_face_limit(report, table).findings:
    print(f"{finding.name:10s} {'ok' if finding.passed else 'FAILED'}  {finding.value:.2e}")
