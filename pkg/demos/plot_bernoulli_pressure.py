"""
Pressure and equilibrium states of a coin
=========================================

The simplest potential reads one symbol: ``0`` scores 0 and ``1`` scores 1.
Its pressure is ``log(1 + e**t)`` and the equilibrium state at inverse
temperature ``t`` is a biased coin. As ``t`` grows the coin freezes on ``1``.
"""

import numpy as np

from rotground import PotentialTable, ScalarPotential, anneal, solve_transfer
from rotground import measure_entropy

coin = PotentialTable(2, 1, [[0.0], [1.0]])

# Pressure from the transfer operator against the closed form.
for t in (0.0, 1.0, 5.0):
    sol = solve_transfer(ScalarPotential.from_table(coin, scale=t))
    print(f"t = {t:4.1f}  P = {sol.pressure:.12f}  log(1 + e^t) = {np.log1p(np.exp(t)):.12f}")

# The equilibrium chain is a coin with bias e/(1+e) at t = 1.
sol = solve_transfer(ScalarPotential.from_table(coin))
print("transition probabilities:", sol.markov.transition[0])
print("entropy:", measure_entropy(sol.markov))

# Annealing: the rotation number climbs to the maximum 1, entropy drains to 0.
trace = anneal(coin, [1.0], [1, 2, 4, 8, 16, 32])
for t, rv, h in zip(trace.schedule, trace.rvs[:, 0], trace.entropies):
    print(f"t = {t:5.1f}  rv = {rv:.10f}  entropy = {h:.3e}")
