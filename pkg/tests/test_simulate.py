import csv
import math

import numpy as np
import pytest
from scipy.stats import norm

from sbmkit.kernels import killed_density
from sbmkit.model import DriftParams, reflect
from sbmkit.simulate import (
    WalkConfig,
    aligned_edges,
    centered_edges,
    endpoint_density,
    joint_histogram,
    killed_endpoint_density,
    lattice_site,
    simulate_exit,
    simulate_killed,
    simulate_paths,
    simulate_paths_with_horizons,
    zero_step_probability,
)

FULL = WalkConfig(n=10_000, paths=100_000, seed=7)
SMALL = WalkConfig(n=400, paths=4_000, seed=3)
EL1 = math.sqrt(2.0 / math.pi)
DRIFTLESS = DriftParams(0.0, 0.0, 0.5)


@pytest.fixture(scope="module")
def driftless_run():
    return simulate_paths(DRIFTLESS, 1.0, 0.0, FULL)


def _within(sample, target, k=3.0):
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    return abs(sample.mean() - target) <= k * se, sample.mean(), se


# ---------------------------------------------------------------------------
# configuration

@pytest.mark.parametrize("kwargs", [
    {"n": 0}, {"n": 2.5}, {"paths": 0}, {"seed": -1},
    {"band_exponent": 0.5}, {"band_exponent": 0.0}, {"zero_rule": "uniform"},
])
def test_walk_config_rejects(kwargs):
    with pytest.raises(ValueError):
        WalkConfig(**kwargs)


def test_step_probability_margin():
    with pytest.raises(ValueError, match="too small"):
        simulate_paths(DriftParams(3.0, 0.0, 0.5), 1.0, 0.0, WalkConfig(n=36, paths=10))
    simulate_paths(DriftParams(3.0, 0.0, 0.5), 1.0, 0.0, WalkConfig(n=37, paths=10))


def test_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        simulate_paths(DRIFTLESS, 0.0, 0.0, SMALL)


def test_killed_needs_positive_start():
    with pytest.raises(ValueError):
        simulate_killed(DRIFTLESS, 1.0, -0.5, SMALL)
    with pytest.raises(ValueError, match="site 0"):
        simulate_killed(DRIFTLESS, 1.0, 0.01, SMALL)


def test_zero_step_rules():
    params = DriftParams(1.0, -1.0, 0.3)
    assert zero_step_probability(params, 100, "skew") == 0.3
    up = 0.3 * 1.1
    assert zero_step_probability(params, 100) == pytest.approx(up / (up + 0.7 * 1.1))
    # with drift the two rules differ; without they agree
    assert zero_step_probability(DRIFTLESS, 100) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# driftless oracles

def test_mean_abs_endpoint(driftless_run):
    ok, mean, se = _within(np.abs(driftless_run.endpoint), EL1)
    assert ok, (mean, se)


def test_mean_local_time(driftless_run):
    ok, mean, se = _within(driftless_run.local_time, EL1)
    assert ok, (mean, se)
    assert abs(mean / EL1 - 1.0) < 0.02


def test_band_local_time_is_biased_low(driftless_run):
    # the occupation-band estimator underestimates by O(eps) at eps = n^(-1/4)
    band = driftless_run.band_local_time.mean()
    assert 0.85 * EL1 < band < EL1


def test_first_hit_fraction():
    runs = simulate_paths(DRIFTLESS, 1.0, 1.0, FULL)
    target = 2.0 * norm.sf(1.0)
    frac = runs.hit.mean()
    assert abs(frac - target) <= 3.0 * math.sqrt(target * (1 - target) / len(runs))
    hits = runs.first_hit_time[runs.hit]
    assert np.all((hits > 0) & (hits <= 1.0))


def test_endpoint_histogram_gaussian(driftless_run):
    edges = aligned_edges(-3.0, 3.0, 0.3, FULL.n)
    emp = endpoint_density(driftless_run, 0.3, edges=edges)
    ref = norm.pdf(emp.centers)
    assert np.all(np.abs(emp.density - ref) <= np.maximum(0.01, 3 * emp.density_stderr))


def test_skew_histogram():
    runs = simulate_paths(DriftParams(0.0, 0.0, 0.7), 1.0, 0.0, FULL)
    edges = centered_edges(runs.endpoint.min(), runs.endpoint.max(), 0.3, FULL.n, FULL.n)
    emp = endpoint_density(runs, 0.3, edges=edges)
    c = emp.centers
    keep = np.abs(c) > 0.2  # the bin around 0 straddles the jump
    ref = np.where(c > 0, 1.4, 0.6) * norm.pdf(c)
    dev = np.abs(emp.density - ref)[keep]
    assert np.all(dev <= np.maximum(0.01, 3 * emp.density_stderr[keep]))
    assert emp.total_mass == pytest.approx(1.0, abs=1e-12)


def test_killed_driftless_mass_and_bins():
    emp = killed_endpoint_density(DRIFTLESS, 1.0, 1.0, FULL, 0.3)
    target = 1.0 - 2.0 * norm.sf(1.0)
    assert abs(emp.total_mass - target) <= 3.0 * math.sqrt(target * (1 - target) / FULL.paths)
    ref = np.array([killed_density(DRIFTLESS, 1.0, 1.0, y) for y in emp.centers])
    assert np.all(np.abs(emp.density - ref) <= np.maximum(0.01, 3 * emp.density_stderr))


def test_killed_paths_stay_positive():
    runs = simulate_killed(DriftParams(0.5, -1.0, 0.4), 1.0, 0.5, SMALL)
    alive = ~runs.absorbed
    assert np.all(runs.endpoint[alive] > 0)
    assert np.all(runs.endpoint[runs.absorbed] == 0)
    assert np.array_equal(runs.absorbed, runs.hit)


def test_joint_histogram_driftless_cell(driftless_run):
    rn = math.sqrt(FULL.n)
    ex = np.array([0.25, 0.75]) + 0.5 / rn
    lx = np.array([0.25, 0.75]) + 0.5 / rn
    joint = joint_histogram(driftless_run, ex, lx)
    # cell average of the classical density (l + |x|) exp(-(l + |x|)^2 / 2) / sqrt(2 pi)
    from scipy.integrate import dblquad
    f = lambda l, x: (l + abs(x)) * math.exp(-0.5 * (l + abs(x)) ** 2) / math.sqrt(2 * math.pi)
    avg = dblquad(f, ex[0], ex[1], lx[0], lx[1])[0] / 0.25
    assert abs(joint.density[0, 0] - avg) <= max(0.01, 3 * joint.density_stderr[0, 0])
    assert avg == pytest.approx(0.2420, abs=0.01)


def test_joint_marginalizes_to_endpoint(driftless_run):
    edges = aligned_edges(-2.0, 2.0, 0.5, FULL.n)
    ledges = np.array([-1.0, 100.0])
    joint = joint_histogram(driftless_run, edges, ledges)
    emp = endpoint_density(driftless_run, 0.5, edges=edges)
    np.testing.assert_allclose(joint.mass[:, 0], emp.mass)


def test_joint_rejects_empty_bins(driftless_run):
    with pytest.raises(ValueError):
        joint_histogram(driftless_run, [0.0], [0.0, 1.0])


# ---------------------------------------------------------------------------
# histogram plumbing

def test_empty_bin_stderr():
    runs = simulate_paths(DRIFTLESS, 1.0, 0.0, SMALL)
    emp = endpoint_density(runs, 0.5, edges=[50.0, 50.5])
    assert emp.mass[0] == 0.0
    assert emp.stderr[0] == pytest.approx(1.0 / SMALL.paths)


def test_endpoint_density_rejects():
    runs = simulate_paths(DRIFTLESS, 1.0, 0.0, SMALL)
    with pytest.raises(ValueError):
        endpoint_density(runs, 0.0)


def test_aligned_edges_avoid_sites():
    n = 400
    edges = aligned_edges(-1.0, 1.0, 0.25, n)
    sites = edges * math.sqrt(n)
    assert np.allclose(sites - np.floor(sites), 0.5)
    assert edges[0] <= -1.0 and edges[-1] >= 1.0


def test_centered_edges_put_zero_mid_bin():
    n, steps = 400, 400
    edges = centered_edges(-1.0, 1.0, 0.3, n, steps)
    i = np.searchsorted(edges, 0.0)
    assert edges[i - 1] < 0.0 < edges[i]
    sites = np.round(edges * math.sqrt(n)).astype(int)
    on = np.isclose(edges * math.sqrt(n), sites)
    assert np.all((sites[on] - steps) % 2 != 0)


# ---------------------------------------------------------------------------
# invariants

def test_deterministic_given_seed():
    params = DriftParams(0.7, -0.4, 0.35)
    a = simulate_paths(params, 1.0, 0.2, SMALL)
    b = simulate_paths(params, 1.0, 0.2, SMALL)
    for name in ("endpoint", "local_time", "first_hit_time", "band_local_time"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    c = simulate_paths(params, 1.0, 0.2, WalkConfig(n=SMALL.n, paths=SMALL.paths, seed=SMALL.seed + 1))
    assert not np.array_equal(a.endpoint, c.endpoint)


def test_paths_are_prefix_stable():
    # stream i depends only on (seed, i), so shorter runs are prefixes of longer ones
    a = simulate_paths(DRIFTLESS, 1.0, 0.0, SMALL)
    b = simulate_paths(DRIFTLESS, 1.0, 0.0, WalkConfig(n=SMALL.n, paths=500, seed=SMALL.seed))
    np.testing.assert_array_equal(a.endpoint[:500], b.endpoint)


def test_horizons_match_single_run():
    cfg = WalkConfig(n=SMALL.n, paths=50, seed=11)
    a = simulate_paths(DRIFTLESS, 1.0, 0.3, cfg)
    b = simulate_paths_with_horizons(DRIFTLESS, np.ones(50), 0.3, cfg)
    np.testing.assert_array_equal(a.endpoint, b.endpoint)


def test_reflection_statistics():
    params = DriftParams(0.8, -0.3, 0.35)
    cfg = WalkConfig(n=2_500, paths=40_000, seed=5)
    a = simulate_paths(params, 1.0, 0.4, cfg)
    b = simulate_paths(reflect(params), 1.0, -0.4, WalkConfig(n=2_500, paths=40_000, seed=6))
    for fa, fb in ((a.endpoint, -b.endpoint), (a.local_time, b.local_time),
                   (a.endpoint > 0, -b.endpoint > 0)):
        fa, fb = np.asarray(fa, float), np.asarray(fb, float)
        se = math.hypot(fa.std() / math.sqrt(fa.size), fb.std() / math.sqrt(fb.size))
        assert abs(fa.mean() - fb.mean()) <= 3 * se


def test_local_time_nonnegative_and_tanaka():
    runs = simulate_paths(DriftParams(0.0, 0.0, 0.5), 1.0, 0.0, SMALL)
    assert np.all(runs.local_time >= 0)
    # driftless symmetric walk: E|S_N| = E[visits before N], exactly in expectation
    ok, mean, se = _within(np.abs(runs.endpoint) - runs.local_time, 0.0)
    assert ok


def test_exit_fraction():
    cfg = WalkConfig(n=2_500, paths=20_000, seed=9)
    frac, se, undecided = simulate_exit(DriftParams(0.0, 0.0, 0.7), -1.0, 0.0, 1.0, cfg)
    assert undecided == 0
    assert abs(frac - 0.7) <= 3 * se
    with pytest.raises(ValueError):
        simulate_exit(DRIFTLESS, 1.0, 0.0, 2.0, cfg)


def test_skew_rule_is_biased_for_exit():
    # the tilted zero step removes an O(1/sqrt(n)) bias visible at coarse n
    params = DriftParams(1.0, 1.0, 0.5)
    target = 1.0 / (1.0 + math.exp(-2.0))
    cfg = WalkConfig(n=25, paths=100_000, seed=2)
    tilted, se, _ = simulate_exit(params, -1.0, 0.0, 1.0, cfg)
    skew, _, _ = simulate_exit(params, -1.0, 0.0, 1.0,
                               WalkConfig(n=25, paths=100_000, seed=2, zero_rule="skew"))
    assert abs(tilted - target) <= 3 * se
    assert skew < tilted


# ---------------------------------------------------------------------------
# access and export

def test_path_summary_access():
    runs = simulate_paths(DRIFTLESS, 1.0, 1.0, WalkConfig(n=100, paths=20, seed=1))
    items = list(runs)
    assert len(items) == 20
    for i, s in enumerate(items):
        assert s.endpoint == runs.endpoint[i]
        assert (s.first_hit_time is None) == (not runs.hit[i])
    assert runs.x0 == lattice_site(1.0, 100) / 10.0


def test_csv_columns(tmp_path):
    runs = simulate_paths(DRIFTLESS, 1.0, 1.0, WalkConfig(n=100, paths=20, seed=1))
    path = tmp_path / "paths.csv"
    runs.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["endpoint", "local_time", "first_hit_time", "absorbed"]
    assert len(rows) == 21
    assert float(rows[1][0]) == runs.endpoint[0]

    emp = endpoint_density(runs, 0.5)
    hpath = tmp_path / "hist.csv"
    emp.to_csv(hpath)
    hrows = list(csv.reader(hpath.open()))
    assert len(hrows) == len(emp.mass) + 1
