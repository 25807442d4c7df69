"""
Position and local time from the origin
=======================================

Started at 0, the pair (position, local time at 0) has an explicit joint
density.  We evaluate it by quadrature and put it next to the
lattice random walk, whose local time is the number of visits to 0 scaled
by the lattice spacing.
"""

# %%
import numpy as np

from sbmkit import (
    DriftParams,
    WalkConfig,
    joint_density_from_zero,
    joint_histogram,
    marginal_density_from_zero,
    simulate_paths,
)

params = DriftParams(m1=1.0, m2=-1.0, p=0.5)
cfg = WalkConfig(n=2_500, paths=40_000, seed=1)
runs = simulate_paths(params, 1.0, 0.0, cfg)

# %%
# Without drift the joint density is the classical
# (l + |x|) exp(-(l + |x|)^2 / 2t) / sqrt(2 pi t^3).
print("driftless p(1, 0.5, 0.5) =", joint_density_from_zero(DriftParams(0, 0, 0.5), 1.0, 0.5, 0.5))

# %%
# A coarse 2D histogram.  After an even number of steps the walk only
# occupies even sites, so each position bin spans an even number of sites
# (26 of spacing 1/50) and the bins are centered on 0 so that no edge hits
# a reachable site.  Local-time edges sit half a step off its grid.
h = 0.5 / np.sqrt(cfg.n)
xe = 26 / np.sqrt(cfg.n) * (np.arange(-2, 2) + 0.5)
le = np.array([0.0, 0.5, 1.0]) + h
jd = joint_histogram(runs, xe, le)
u, w = np.polynomial.legendre.leggauss(4)


def cell_average(x0, x1, l0, l1):
    xs = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * u
    ls = 0.5 * (l0 + l1) + 0.5 * (l1 - l0) * u
    vals = [[joint_density_from_zero(params, 1.0, x, l) for l in ls] for x in xs]
    return 0.25 * float(w @ np.array(vals) @ w)


for i in range(len(xe) - 1):
    cells = []
    for j in range(len(le) - 1):
        ref = cell_average(xe[i], xe[i + 1], le[j], le[j + 1])
        cells.append(f"walk {jd.density[i, j]:.3f} +- {jd.density_stderr[i, j]:.3f} / exact {ref:.3f}")
    print(f"x in [{xe[i]:+.2f}, {xe[i + 1]:+.2f}): " + " | ".join(cells))

# %%
# Integrating out the local time gives the marginal, which is continuous
# at 0 here because p = 1/2 and the drifts mirror each other.
for x in (-1.0, -0.01, 0.01, 1.0):
    print(f"marginal at {x:+.2f}: {marginal_density_from_zero(params, 1.0, x):.5f}")
