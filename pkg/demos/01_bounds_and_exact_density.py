"""
Two-sided bounds and the exact transition density
=================================================

The drift is ``m1`` on the right half-line and ``m2`` on the left, and the
process is pushed through 0 with skewness ``p``.  Its transition density
has no closed form in general, but it is squeezed between two explicit
functions whose ratio depends only on the spread of the drifts.
"""

# %%
# Pick a drift pair that points toward the origin from both sides.
import math

from sbmkit import DriftParams, SpaceTimePoint, density_bounds, exact_density

params = DriftParams(m1=1.0, m2=-2.0, p=0.3)

# %%
# Evaluate the bounds and the quadrature value on a few points.  The exact
# density always sits inside the band.
print(f"{'t':>4} {'x':>5} {'y':>5} {'lower':>11} {'exact':>11} {'upper':>11}")
for t, x, y in [(0.5, 0.5, 1.5), (1.0, 1.0, -1.0), (2.0, -0.5, -1.5), (1.0, -1.5, 0.5)]:
    pt = SpaceTimePoint(t, x, y)
    b = density_bounds(params, pt)
    p = exact_density(params, pt)
    print(f"{t:4.1f} {x:5.1f} {y:5.1f} {b.lower:11.6f} {p:11.6f} {b.upper:11.6f}")

# %%
# When ``x`` and ``y`` lie on opposite sides of 0 every path crosses the
# origin, so there is no killed contribution and the band has a fixed
# width: upper / lower = exp((max m^2 - min m^2) t / 2).
pt = SpaceTimePoint(1.0, 1.0, -1.0)
b = density_bounds(params, pt)
print("ratio", b.upper / b.lower, "expected", math.exp((4.0 - 1.0) / 2.0))

# %%
# Equal drift magnitudes collapse the band to a single curve.  With
# ``m1 = m2`` and ``p = 1/2`` the curve is the ordinary drifted Gaussian.
flat = DriftParams(1.0, 1.0, 0.5)
b = density_bounds(flat, SpaceTimePoint(1.0, 1.0, 2.0))
print("collapsed bounds", b.lower, b.upper)
print("drifted Gaussian", math.exp(-0.5 * (2.0 - 1.0 - 1.0) ** 2) / math.sqrt(2 * math.pi))
