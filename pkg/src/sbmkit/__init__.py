"""
Skew Brownian motion with a two-valued drift: explicit kernels, a lattice
random-walk simulator and verification suites tying the two together.
"""
from .kernels import (
    DensityBounds,
    SpaceTimePoint,
    density_bounds,
    exact_density,
    hitting_density,
    hitting_total_mass,
    joint_density_from_zero,
    killed_density,
    marginal_density_from_zero,
)
from .model import (
    Classification,
    DriftParams,
    classify,
    exit_probability,
    reflect,
    scale_function,
    symmetrizing_density,
)
from .numerics import (
    DampingViolation,
    NonConvergence,
    QuadratureSpec,
    QuadResult,
    integrate_1d,
    integrate_2d_simplex,
    integrate_semi_infinite,
    laplace_gaussian_integral,
)
from .simulate import (
    EmpiricalDensity,
    JointDensity,
    PathSummaries,
    WalkConfig,
    endpoint_density,
    joint_histogram,
    killed_endpoint_density,
    simulate_exit,
    simulate_killed,
    simulate_paths,
)
from .verify import Check, SuiteReport, run_suite

__version__ = "0.1.0"
