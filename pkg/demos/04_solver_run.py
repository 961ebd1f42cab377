"""A full trust-region run on the cosine-tracking instance.

One outer iteration computes the gradient once; the inner loop shrinks the
radius until the actual reduction is at least a small fraction of the
predicted one. The run ends when the subproblem predicts no further decrease
or the radius falls below the cell width. We compare the two radius rules:
resetting to the initial radius after each accepted step, and doubling the
accepted radius (capped by the diameter of the feasible set).
"""

from slip import RadiusStrategy, SlipConfig, cosine_tracking_instance, run, zero_control

model = cosine_tracking_instance()
v0 = zero_control(model, 32)

config = SlipConfig(n_cells=32, delta0=0.125)
result = run(model, config, v0)

print("accepted iterations (radius reset):")
print(f"  {'n':>3} {'k':>3} {'delta':>8} {'pred':>11} {'ared':>11} {'J':>12}")
for rec in result.accepted_records:
    print(f"  {rec.n:>3} {rec.k:>3} {rec.delta:>8.4f} "
          f"{rec.pred:>11.3e} {rec.ared:>11.3e} {rec.J:>12.6e}")
print(f"termination: {result.termination.value}")
print(f"final J = {result.final_J:.6e}  (F = {result.final_F:.6e}, "
      f"TV = {result.final_tv:.1f})")
print()

doubled = run(
    model,
    SlipConfig(n_cells=32, delta0=0.125, radius_strategy=RadiusStrategy.DOUBLING),
    v0,
)
print(f"radius doubling: J = {doubled.final_J:.6e} after "
      f"{len(doubled.accepted_records)} accepted steps "
      f"({doubled.termination.value})")

reset_evals = len(result.log)
doubling_evals = len(doubled.log)
print(f"subproblem solves: {reset_evals} (reset) vs {doubling_evals} (doubling)")
