"""
Lattice random-walk Monte Carlo for skew Brownian motion with two-valued drift.

The walk lives on ``k / sqrt(n)`` and takes ``floor(n t)`` steps of size
``1/sqrt(n)``.  Away from 0 it steps up with probability
``(1 + m/sqrt(n)) / 2`` (``m = m1`` above 0, ``m2`` below); at 0 it steps up
with probability ``p``.  Every path owns a splitmix64 stream keyed by
``(seed, path index)``, so results do not depend on how paths are spread
over threads.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Optional

# numba reads these once at import; the pool has to be sized before that so
# SBMKIT_THREADS can ask for more workers than the default
if os.environ.get("SBMKIT_THREADS", "").strip().isdigit():
    os.environ.setdefault("NUMBA_NUM_THREADS", os.environ["SBMKIT_THREADS"].strip())
# skip the TBB probe, which warns on older TBB builds
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

import numba
import numpy as np

from .model import DriftParams

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO32 = 4294967296.0
_LOW32 = np.uint64(0xFFFFFFFF)


@dataclass(frozen=True)
class WalkConfig:
    """Lattice resolution and sampling controls.

    ``band_exponent`` sets the half-width ``eps = n ** -band_exponent`` of
    the occupation band used by ``PathSummaries.band_local_time``.

    ``zero_rule`` picks the step at site 0.  ``"skew"`` steps up with
    probability ``p``.  ``"tilted"`` (default) steps up with probability
    ``p (1 + m1/sqrt(n)) / (p (1 + m1/sqrt(n)) + (1-p) (1 - m2/sqrt(n)))``,
    which makes the walk's harmonic function match the scale function
    across 0 and removes an ``O(1/sqrt(n))`` bias; both rules have the
    same scaling limit.
    """

    n: int = 10_000
    paths: int = 100_000
    seed: int = 0
    band_exponent: float = 0.25
    zero_rule: str = "tilted"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.paths) != self.paths or self.paths < 1:
            raise ValueError(f"paths must be a positive integer, got {self.paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.band_exponent < 0.5:
            raise ValueError(f"band_exponent must be in (0, 1/2), got {self.band_exponent}")
        if self.zero_rule not in ("tilted", "skew"):
            raise ValueError(f"zero_rule must be 'tilted' or 'skew', got {self.zero_rule!r}")

    @property
    def spacing(self) -> float:
        return 1.0 / math.sqrt(self.n)

    @property
    def band(self) -> float:
        return self.n ** -self.band_exponent

    def check(self, params: DriftParams):
        if not self.n > 4.0 * max(params.m1 ** 2, params.m2 ** 2):
            raise ValueError(
                f"n={self.n} too small for drifts ({params.m1}, {params.m2}): "
                "need n > 4 max(m1^2, m2^2)"
            )


@dataclass(frozen=True)
class PathSummary:
    endpoint: float
    local_time: float
    first_hit_time: Optional[float]
    absorbed: bool


@dataclass
class PathSummaries:
    """Per-path results stored column-wise.

    ``local_time`` counts visits to site 0 (before each step) times
    ``1/sqrt(n)``, the lattice version of the symmetric local time.
    ``band_local_time`` is the occupation-band estimate ``(time in
    [-eps, eps]) / (2 eps)``; it carries an ``O(eps)`` downward bias.
    ``first_hit_time`` is NaN for paths that never visit 0.
    """

    endpoint: np.ndarray
    local_time: np.ndarray
    first_hit_time: np.ndarray
    absorbed: np.ndarray
    band_local_time: np.ndarray
    t: float
    x0: float
    n: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.endpoint)

    def __getitem__(self, i) -> PathSummary:
        hit = self.first_hit_time[i]
        return PathSummary(
            float(self.endpoint[i]),
            float(self.local_time[i]),
            None if math.isnan(hit) else float(hit),
            bool(self.absorbed[i]),
        )

    def __iter__(self) -> Iterator[PathSummary]:
        for i in range(len(self)):
            yield self[i]

    @property
    def hit(self) -> np.ndarray:
        return ~np.isnan(self.first_hit_time)

    def to_csv(self, path):
        """Write columns endpoint, local_time, first_hit_time, absorbed."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["endpoint", "local_time", "first_hit_time", "absorbed"])
            for e, l, h, a in zip(self.endpoint, self.local_time, self.first_hit_time, self.absorbed):
                w.writerow([repr(float(e)), repr(float(l)), "" if math.isnan(h) else repr(float(h)), int(a)])


@dataclass(frozen=True)
class EmpiricalDensity:
    """Histogram with binomial standard errors.

    ``mass`` and ``stderr`` are per-bin probabilities; ``density`` and
    ``density_stderr`` divide by the bin widths.
    """

    bin_edges: np.ndarray
    mass: np.ndarray
    stderr: np.ndarray
    paths: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.mass / self.widths

    @property
    def density_stderr(self) -> np.ndarray:
        return self.stderr / self.widths

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "mass", "stderr", "density", "density_stderr"])
            for row in zip(self.bin_edges[:-1], self.bin_edges[1:], self.mass, self.stderr,
                           self.density, self.density_stderr):
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class JointDensity:
    """2D histogram over (endpoint, local time), probability scale."""

    endpoint_edges: np.ndarray
    local_time_edges: np.ndarray
    mass: np.ndarray
    stderr: np.ndarray
    paths: int

    @property
    def cell_areas(self) -> np.ndarray:
        return np.outer(np.diff(self.endpoint_edges), np.diff(self.local_time_edges))

    @property
    def density(self) -> np.ndarray:
        return self.mass / self.cell_areas

    @property
    def density_stderr(self) -> np.ndarray:
        return self.stderr / self.cell_areas


# ---------------------------------------------------------------------------
# numba kernels

@numba.njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(inline="always")
def _path_state(seed, i):
    return _mix(seed ^ _mix(np.uint64(i) * _GAMMA + _GAMMA))


@numba.njit(parallel=True, cache=True)
def _walk_kernel(seed, k0, steps, thr_pos, thr_neg, thr_zero, band_k, killed,
                 endpoint, visits, occupation, first_hit, absorbed):
    npaths = steps.shape[0]
    kmax = int(math.floor(band_k + 0.5))
    for i in numba.prange(npaths):
        state = _path_state(seed, i)
        k = k0
        occ = 0.0
        nvis = 0
        hit = -1
        dead = False
        word = np.uint64(0)
        have = 0
        nsteps = steps[i]
        for j in range(nsteps):
            # left-point occupation of the position held during step j
            ak = abs(k)
            if ak <= kmax:
                w = band_k + 0.5 - ak
                occ += 1.0 if w >= 1.0 else w
            if k == 0:
                nvis += 1
            if have == 0:
                state += _GAMMA
                word = _mix(state)
                u = word & _LOW32
                have = 1
            else:
                u = word >> np.uint64(32)
                have = 0
            if k > 0:
                k += 1 if u < thr_pos else -1
            elif k < 0:
                k += 1 if u < thr_neg else -1
            else:
                k += 1 if u < thr_zero else -1
            if k == 0 and hit < 0:
                hit = j + 1
                if killed:
                    dead = True
                    break
        endpoint[i] = k
        visits[i] = nvis
        occupation[i] = occ
        first_hit[i] = hit
        absorbed[i] = dead


@numba.njit(parallel=True, cache=True)
def _exit_kernel(seed, k0, ka, kb, max_steps, thr_pos, thr_neg, thr_zero, upper, undecided):
    npaths = upper.shape[0]
    for i in numba.prange(npaths):
        state = _path_state(seed, i)
        k = k0
        word = np.uint64(0)
        have = 0
        done = False
        for j in range(max_steps):
            if have == 0:
                state += _GAMMA
                word = _mix(state)
                u = word & _LOW32
                have = 1
            else:
                u = word >> np.uint64(32)
                have = 0
            if k > 0:
                k += 1 if u < thr_pos else -1
            elif k < 0:
                k += 1 if u < thr_neg else -1
            else:
                k += 1 if u < thr_zero else -1
            if k >= kb:
                upper[i] = True
                done = True
                break
            if k <= ka:
                upper[i] = False
                done = True
                break
        undecided[i] = not done


def _threshold(prob: float) -> np.uint64:
    return np.uint64(min(max(round(prob * _TWO32), 0), 2**32))


def zero_step_probability(params: DriftParams, n: int, rule: str = "tilted") -> float:
    """Probability of stepping up from site 0."""
    if rule == "skew":
        return params.p
    rn = math.sqrt(n)
    up = params.p * (1.0 + params.m1 / rn)
    return up / (up + (1.0 - params.p) * (1.0 - params.m2 / rn))


def _thresholds(params: DriftParams, n: int, rule: str = "tilted"):
    rn = math.sqrt(n)
    return (
        _threshold(0.5 * (1.0 + params.m1 / rn)),
        _threshold(0.5 * (1.0 + params.m2 / rn)),
        _threshold(zero_step_probability(params, n, rule)),
    )


def configure_threads(threads: Optional[int] = None) -> int:
    """Cap numba's worker count, by default from ``SBMKIT_THREADS``."""
    if threads is None:
        env = os.environ.get("SBMKIT_THREADS")
        threads = int(env) if env else numba.config.NUMBA_NUM_THREADS
    threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


def lattice_site(x: float, n: int) -> int:
    return int(round(x * math.sqrt(n)))


def _run(params, t, x0, cfg, killed, steps=None):
    cfg.check(params)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    configure_threads()
    n = cfg.n
    if steps is None:
        steps = np.full(cfg.paths, int(math.floor(n * t + 1e-9)), dtype=np.int64)
    steps = np.ascontiguousarray(steps, dtype=np.int64)
    npaths = steps.shape[0]
    k0 = lattice_site(x0, n)
    endpoint = np.empty(npaths, dtype=np.int64)
    visits = np.empty(npaths, dtype=np.int64)
    occupation = np.empty(npaths, dtype=np.float64)
    first_hit = np.empty(npaths, dtype=np.int64)
    absorbed = np.empty(npaths, dtype=np.bool_)
    band_k = cfg.band * math.sqrt(n)
    _walk_kernel(np.uint64(cfg.seed), k0, steps, *_thresholds(params, n, cfg.zero_rule), band_k, killed,
                 endpoint, visits, occupation, first_hit, absorbed)
    rn = math.sqrt(n)
    hit_time = np.where(first_hit >= 0, first_hit / n, np.nan)
    return PathSummaries(
        endpoint=endpoint / rn,
        # discrete Tanaka: |S_{j+1}| - |S_j| = sgn(S_j) dS_j + 1{S_j = 0}
        local_time=visits / rn,
        band_local_time=occupation / (n * 2.0 * cfg.band),
        first_hit_time=hit_time,
        absorbed=absorbed,
        t=t,
        x0=k0 / rn,
        n=n,
        meta={"params": params, "cfg": cfg, "killed": killed},
    )


def simulate_paths(params: DriftParams, t: float, x0: float, cfg: WalkConfig) -> PathSummaries:
    """Run ``cfg.paths`` walks of ``floor(n t)`` steps from the site nearest ``x0``."""
    return _run(params, t, x0, cfg, killed=False)


def simulate_paths_with_horizons(params: DriftParams, horizons, x0: float, cfg: WalkConfig) -> PathSummaries:
    """One walk per entry of ``horizons`` (times), each run for its own duration.

    ``cfg.paths`` is ignored; path ``i`` still uses stream ``(cfg.seed, i)``.
    """
    horizons = np.asarray(horizons, dtype=float)
    steps = np.floor(horizons * cfg.n + 1e-9).astype(np.int64)
    t = float(horizons.max()) if horizons.size else 0.0
    return _run(params, t if t > 0 else 1.0, x0, cfg, killed=False, steps=steps)


def simulate_killed(params: DriftParams, t: float, x0: float, cfg: WalkConfig) -> PathSummaries:
    """Walks absorbed at the first visit to site 0."""
    if not x0 > 0:
        raise ValueError(f"x0 must be positive for killed runs, got {x0}")
    if lattice_site(x0, cfg.n) == 0:
        raise ValueError("x0 rounds to lattice site 0")
    return _run(params, t, x0, cfg, killed=True)


def simulate_exit(params: DriftParams, a: float, x0: float, b: float, cfg: WalkConfig,
                  max_time: float = 1e3):
    """Fraction of walks from ``x0`` reaching ``b`` before ``a``.

    Returns ``(fraction, stderr, undecided)`` where ``undecided`` counts
    walks still inside ``(a, b)`` after ``max_time``.
    """
    if not a < x0 < b:
        raise ValueError(f"need a < x0 < b, got a={a}, x0={x0}, b={b}")
    cfg.check(params)
    configure_threads()
    n = cfg.n
    ka, k0, kb = lattice_site(a, n), lattice_site(x0, n), lattice_site(b, n)
    if not ka < k0 < kb:
        raise ValueError("a, x0, b collapse onto the same lattice sites")
    upper = np.zeros(cfg.paths, dtype=np.bool_)
    undecided = np.zeros(cfg.paths, dtype=np.bool_)
    _exit_kernel(np.uint64(cfg.seed), k0, ka, kb, int(max_time * n), *_thresholds(params, n, cfg.zero_rule),
                 upper, undecided)
    frac = float(upper.mean())
    return frac, math.sqrt(frac * (1.0 - frac) / cfg.paths), int(undecided.sum())


# ---------------------------------------------------------------------------
# histograms

def aligned_edges(lo: float, hi: float, width: float, n: int) -> np.ndarray:
    """Bin edges of the given width covering ``[lo, hi]``, offset half a lattice step.

    The offset keeps every lattice site strictly inside a bin.
    """
    if not width > 0:
        raise ValueError(f"bin width must be positive, got {width}")
    shift = 0.5 / math.sqrt(n)
    j0 = math.floor((lo - shift) / width)
    j1 = math.ceil((hi - shift) / width)
    return shift + width * np.arange(j0, j1 + 1)


def centered_edges(lo: float, hi: float, width: float, n: int, steps: int, k0: int = 0) -> np.ndarray:
    """Bin edges of the given width with 0 at the center of a bin.

    Used for walks started at 0, whose density may jump there: the lattice
    site 0 then sits in the middle of its bin instead of on one side of a
    discontinuity.  Edges that would fall on a reachable site (same parity
    as ``k0 + steps``) move one lattice step to the right.
    """
    if not width > 0:
        raise ValueError(f"bin width must be positive, got {width}")
    rn = math.sqrt(n)
    j0 = math.floor(lo / width - 0.5)
    j1 = math.ceil(hi / width - 0.5)
    edges = width * (np.arange(j0, j1 + 1) + 0.5)
    sites = edges * rn
    on_site = np.abs(sites - np.round(sites)) < 1e-9
    reachable = (np.round(sites).astype(np.int64) - (k0 + steps)) % 2 == 0
    return edges + np.where(on_site & reachable, 1.0 / rn, 0.0)


def _binomial(counts, total):
    mass = counts / total
    # zero-count bins get the one-success bound so the error is never 0
    se = np.sqrt(np.maximum(mass * (1.0 - mass), 1.0 / total) / total)
    return mass, se


def endpoint_density(summaries: PathSummaries, bin_width: float, edges=None,
                     survivors_only: bool = False) -> EmpiricalDensity:
    """Endpoint histogram normalized by the total number of paths."""
    if len(summaries) == 0:
        raise ValueError("no paths")
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    x = summaries.endpoint
    if survivors_only:
        x = x[~summaries.absorbed]
    if edges is None:
        lo, hi = (x.min(), x.max()) if x.size else (0.0, bin_width)
        edges = aligned_edges(lo, hi, bin_width, summaries.n)
    edges = np.asarray(edges, dtype=float)
    counts, _ = np.histogram(x, bins=edges)
    mass, se = _binomial(counts.astype(float), len(summaries))
    return EmpiricalDensity(edges, mass, se, len(summaries))


def killed_endpoint_density(params: DriftParams, t: float, x0: float, cfg: WalkConfig,
                            bin_width: float, edges=None) -> EmpiricalDensity:
    """Sub-probability histogram of endpoints of walks not yet absorbed at 0."""
    runs = simulate_killed(params, t, x0, cfg)
    if edges is None:
        alive = runs.endpoint[~runs.absorbed]
        hi = alive.max() if alive.size else bin_width
        edges = aligned_edges(0.0, hi, bin_width, cfg.n)
        # survivors live on (0, inf); the first aligned edge sits below 0
        edges = edges[edges > 0.0]
    return endpoint_density(runs, bin_width, edges=edges, survivors_only=True)


def joint_histogram(summaries: PathSummaries, endpoint_bins, local_time_bins) -> JointDensity:
    """Histogram of (endpoint, local time) for walks started at 0."""
    if len(summaries) == 0:
        raise ValueError("no paths")
    ex = np.asarray(endpoint_bins, dtype=float)
    lx = np.asarray(local_time_bins, dtype=float)
    if ex.size < 2 or lx.size < 2:
        raise ValueError("need at least one bin along each axis")
    counts, _, _ = np.histogram2d(summaries.endpoint, summaries.local_time, bins=[ex, lx])
    mass, se = _binomial(counts, len(summaries))
    return JointDensity(ex, lx, mass, se, len(summaries))
