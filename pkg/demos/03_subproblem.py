"""The trust-region integer subproblem, solved exactly by dynamic programming.

Given linear coefficients c (cell integrals of the current gradient), the
subproblem minimizes  c . (v - center) + alpha (TV(v) - TV(center))  over
feasible integer controls within an L1 ball around the center. Because every
deviation costs a whole multiple of the cell width, the ball constraint
reduces to an integer budget and the problem is a resource-constrained
shortest path: states (cell, level, budget used), solved exactly in
O(N M^2 B). A brute-force enumeration over all M^N controls verifies it.
"""

import numpy as np

from slip import (
    Control,
    LevelSet,
    TripInstance,
    UniformGrid,
    assemble,
    budget_units,
    cosine_tracking_instance,
    solve_bruteforce,
    solve_dp,
    zero_control,
)

# a small handmade instance -------------------------------------------------
levels = LevelSet((-1, 0, 1))
grid = UniformGrid(0.0, 1.0, 6)
center = Control(grid, np.zeros(6, dtype=int), levels)
coeffs = np.array([0.9, -1.2, -0.4, 0.3, -0.8, 0.1])
inst = TripInstance(center, coeffs, delta=3 * grid.h, alpha=0.25, levels=levels)

print(f"budget: {budget_units(inst.delta, grid.h)} units "
      f"(radius {inst.delta}, cell width {grid.h:.4f})")
sol = solve_dp(inst)
print("DP minimizer:   ", sol.minimizer.values.tolist())
print(f"DP objective:    {sol.objective:+.6f}   (pred = {sol.pred:+.6f})")

oracle = solve_bruteforce(inst)
print("brute force:    ", oracle.minimizer.values.tolist())
print("objectives equal:", abs(sol.objective - oracle.objective) <= 1e-12)
print()

# growing the radius can only improve the optimum ---------------------------
print("radius sweep (optimal objective is monotone):")
for b in range(0, 7):
    grown = TripInstance(center, coeffs, b * grid.h, 0.25, levels)
    print(f"  B = {b}: objective {solve_dp(grown).objective:+.6f}")
print()

# assembling from the tracking model ----------------------------------------
model = cosine_tracking_instance()
v = zero_control(model, 32)
trip = assemble(v, model, delta=0.125)
step = solve_dp(trip)
print("subproblem at the zero control of the tracking instance:")
print("  proposed step:", step.minimizer.values.tolist())
print(f"  predicted reduction: {step.pred:.6f}")
