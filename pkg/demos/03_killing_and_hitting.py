"""
Killed paths and the first visit to 0
=====================================

Paths started at ``x > 0`` that have not yet touched 0 see only the drift
``m1``, so their density is the reflection-principle kernel times a
Girsanov factor.  The factor carries the elapsed time ``t``; dropping it
is only harmless at ``t = 1``, and the walk tells the two apart at
``t = 4``.
"""

# %%
import math

import numpy as np

from sbmkit import (
    DriftParams,
    WalkConfig,
    hitting_density,
    hitting_total_mass,
    killed_density,
    killed_endpoint_density,
)

params = DriftParams(m1=0.5, m2=0.0, p=0.5)
cfg = WalkConfig(n=2_500, paths=40_000, seed=3)

# %%
# Histogram of survivors at t = 4 against both versions of the factor.
emp = killed_endpoint_density(params, 4.0, 1.0, cfg, bin_width=0.4)
for c, d, se in zip(emp.centers[:8], emp.density[:8], emp.density_stderr[:8]):
    right = killed_density(params, 4.0, 1.0, c)
    time_free = killed_density(params, 4.0, 1.0, c, time_free_exponent=True)
    print(f"y={c:4.2f} walk {d:.4f}+-{se:.4f}  with t {right:.4f}  without t {time_free:.4f}")

# %%
# The first hitting time of 0 has the inverse-Gaussian density.  With the
# drift pointing away from 0 some paths never come back, and the total
# mass is exp(-2 m1 x).
print("P(ever hit 0) =", hitting_total_mass(params, 1.0), "=", math.exp(-1.0))
s = np.linspace(0.25, 4.0, 6)
print("density:", np.round([hitting_density(params, 1.0, v) for v in s], 5))
