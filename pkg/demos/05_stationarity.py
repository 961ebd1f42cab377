"""Measuring how close an integer control is to a stationary point.

The switch-level measure integrates the gradient field against small windows
around each jump of the control; at a local minimizer of the relaxed problem
those averages satisfy sign conditions, so the aggregated violation is a
useful progress diagnostic. Independently of any gradient condition, we can
certify a control outright by enumerating every feasible control within an
L1 ball and checking none improves the objective.
"""

from slip import (
    SlipConfig,
    cosine_tracking_instance,
    run,
    sl_measure,
    verify_r_optimality,
    zero_control,
)
from slip.stationarity import count_ball

model = cosine_tracking_instance()
v0 = zero_control(model, 32)

result = run(model, SlipConfig(n_cells=32, delta0=0.125), v0)

print("switch-level measure along the accepted iterates:")
for rec in result.accepted_records:
    print(f"  n = {rec.n:>2}: J = {rec.J:.6e}   measure = {rec.stationarity:.6e}")
report = sl_measure(result.final, model)
print(f"final control: measure = {report.measure:.6e} "
      f"over {len(report.switches)} switches")
print()

# exhaustive certification on a coarser grid --------------------------------
small = cosine_tracking_instance(finest_cells=1536)
coarse = run(small, SlipConfig(n_cells=12, delta0=0.5), zero_control(small, 12))
print(f"12-cell run: J = {coarse.final_J:.6e} ({coarse.termination.value})")
for r in (1, 2):
    n_neighbors = count_ball(coarse.final, small.levels, r)
    check = verify_r_optimality(coarse.final, small, r_units=r)
    verdict = "optimal" if check.optimal_in_neighborhood else "improvable"
    print(f"radius {r} ball: {n_neighbors} controls, {verdict} "
          f"(gap {check.gap:.3e})")
