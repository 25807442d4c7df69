"""
Recurrence and exit probabilities
=================================

The process returns to 0 forever exactly when neither drift pushes it
away, i.e. ``m1 <= 0 <= m2``.  The scale function turns exit questions
into ratios, and the walk confirms them.
"""

# %%
from sbmkit import DriftParams, WalkConfig, classify, exit_probability, scale_function, simulate_exit

for m1 in (-1.0, 0.0, 1.0):
    row = [classify(DriftParams(m1, m2, 0.5)).value for m2 in (-1.0, 0.0, 1.0)]
    print(f"m1={m1:+.0f}:", row)

# %%
# Without drift the scale function is piecewise linear with slopes
# weighted by the skewness, so from 0 the process leaves [-1, 1] at the
# top with probability p.
params = DriftParams(0.0, 0.0, 0.7)
print("s(-1), s(0), s(1) =", [scale_function(params, x) for x in (-1.0, 0.0, 1.0)])
prob = exit_probability(params, -1.0, 0.0, 1.0)
frac, se, _ = simulate_exit(params, -1.0, 0.0, 1.0, WalkConfig(n=2_500, paths=20_000, seed=4))
print(f"exit at +1: scale function {prob:.4f}, walk {frac:.4f} +- {se:.4f}")

# %%
# With drift the answer depends on both the drifts and the skewness.
params = DriftParams(-0.5, 1.0, 0.3)
prob = exit_probability(params, -1.0, 0.5, 1.5)
frac, se, _ = simulate_exit(params, -1.0, 0.5, 1.5, WalkConfig(n=2_500, paths=20_000, seed=5))
print(f"from 0.5 on [-1, 1.5]: scale function {prob:.4f}, walk {frac:.4f} +- {se:.4f}")
