"""
Transition-density kernels for skew Brownian motion with two-valued drift.

Conventions used throughout:

* ``f_a(s) = a / sqrt(2 pi s^3) * exp(-a^2 / 2s)`` is the first-passage
  density of Brownian motion to level ``a``; these densities convolve as
  ``f_a * f_b = f_{a+b}``.
* Started at 0, the local time ``l`` splits the elapsed time into time
  spent positive (an ``f_{l p}`` clock) and time spent negative (an
  ``f_{l (1-p)}`` clock); the final excursion to ``x`` adds ``f_{|x|}`` to
  the clock of its sign.  Girsanov then weights a path by
  ``exp(F(x) - beta l - m1^2 T_+/2 - m2^2 T_-/2)`` with ``F(x) = x m(x)``
  and ``T_+``, ``T_-`` the times spent positive and negative.

Because both clocks are sums of first-passage variables, every density here
reduces to a single integral over the time spent positive, with the
local-time integral done in closed form.  The literal double-integral
representation over ``0 < v < u < t`` is kept in
:func:`joint_density_from_zero` and used for cross-checks.

For ``x < 0`` every kernel goes through :func:`reflect` and
:func:`reflect_point`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DriftParams, drift_potential, reflect, skew_weight_at
from .numerics import (
    DEFAULT_SPEC,
    DampingViolation,
    QuadratureSpec,
    QuadResult,
    gauss_laplace_moments,
    integrate_1d,
    integrate_2d_simplex,
    integrate_semi_infinite,
    laplace_gaussian_integral,
)

SQRT2PI = math.sqrt(2.0 * math.pi)
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpaceTimePoint:
    t: float
    x: float
    y: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")


@dataclass(frozen=True)
class DensityBounds:
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, eps: float = 0.0) -> bool:
        return self.lower - eps <= value <= self.upper + eps


def reflect_point(pt: SpaceTimePoint) -> SpaceTimePoint:
    return SpaceTimePoint(pt.t, -pt.x, -pt.y)


def _check_t(t):
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")


def _result(res: QuadResult, full_output: bool, what: str):
    if full_output:
        return res
    return res.require(what)


# ---------------------------------------------------------------------------
# killed density and hitting time

def killed_density(params: DriftParams, t: float, x: float, y: float,
                   *, time_free_exponent: bool = False) -> float:
    """Density at ``y`` of paths from ``x > 0`` that have not hit 0 by time ``t``.

    The killing factor is ``exp(-m1^2 t / 2)``.  ``time_free_exponent``
    drops the ``t`` (``exp(-m1^2 / 2)``); it only agrees at ``t = 1``.
    """
    _check_t(t)
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if not y >= 0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if y == 0:
        return 0.0
    m1 = params.m1
    kill = m1 * m1 / 2.0 if time_free_exponent else m1 * m1 * t / 2.0
    # e^{-(x-y)^2/2t} - e^{-(x+y)^2/2t} = e^{-(x-y)^2/2t} (1 - e^{-2xy/t})
    gap = -math.expm1(-2.0 * x * y / t)
    return math.exp(-kill - m1 * x + m1 * y - (x - y) ** 2 / (2.0 * t)) * gap / math.sqrt(TWO_PI * t)


def hitting_density(params: DriftParams, x: float, s: float) -> float:
    """Density of the first hitting time of 0 from ``x != 0``, at time ``s``."""
    if x == 0:
        raise ValueError("x = 0: hitting time is 0, no density")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    m = params.m1 if x > 0 else -params.m2
    ax = abs(x)
    return ax / math.sqrt(TWO_PI * s ** 3) * math.exp(-((m * s + ax) ** 2) / (2.0 * s))


def hitting_total_mass(params: DriftParams, x: float) -> float:
    """``P^x[sigma_0 < inf]``: 1 if the drift points to 0, else ``exp(-2 m |x|)``."""
    if x == 0:
        raise ValueError("x must be nonzero")
    m = params.m1 if x > 0 else -params.m2
    return 1.0 if m <= 0 else math.exp(-2.0 * m * abs(x))


# ---------------------------------------------------------------------------
# driftless joint densities

def driftless_joint_density(p: float, t: float, x: float, y: float, l: float) -> float:
    """Joint density of ``(Y_t, L_t)`` at ``(y, l)`` for driftless skew BM from ``x``.

    Only the part of the law on paths that have reached 0 is included (which
    is everything with ``l > 0``).
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    _check_t(t)
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    if x == 0:
        raise ValueError("x = 0 is served by joint_density_from_zero")
    if x < 0:
        p, x, y = 1.0 - p, -x, -y
    if y <= 0:
        w, c = 2.0 * (1.0 - p), l - y + x
    else:
        w, c = 2.0 * p, l + y + x
    return w * c / math.sqrt(TWO_PI * t ** 3) * math.exp(-c * c / (2.0 * t))


# ---------------------------------------------------------------------------
# two-clock occupation integrals

def _clock_kernel(P: float, N: float, cpos: float, cneg: float, p: float, beta: float,
                  m1sq: float, m2sq: float) -> float:
    """``int_0^inf exp(-beta l) f_{cpos+pl}(P) f_{cneg+(1-p)l}(N) dl * exp(-m1^2 P/2 - m2^2 N/2)``."""
    if P <= 0.0 or N <= 0.0:
        return 0.0
    q = 1.0 - p
    A = p * p / P + q * q / N
    B = beta + cpos * p / P + cneg * q / N
    log_scale, j0, j1, j2 = gauss_laplace_moments(A, B)
    poly = cpos * cneg * j0 + (cpos * q + cneg * p) * j1 + p * q * j2
    if poly <= 0.0:
        return 0.0
    expo = (log_scale - cpos * cpos / (2.0 * P) - cneg * cneg / (2.0 * N)
            - 0.5 * m1sq * P - 0.5 * m2sq * N)
    return math.exp(expo) * poly / (TWO_PI * (P * N) ** 1.5)


def _occupation_integral(t: float, cpos: float, cneg: float, params: DriftParams,
                         spec: QuadratureSpec) -> QuadResult:
    p, beta = params.p, params.beta
    m1sq, m2sq = params.m1 ** 2, params.m2 ** 2
    f = lambda P: _clock_kernel(P, t - P, cpos, cneg, p, beta, m1sq, m2sq)
    return integrate_1d(f, 0.0, t, spec)


def _scaled(res: QuadResult, factor: float) -> QuadResult:
    return QuadResult(res.value * factor, res.error * abs(factor), res.converged)


# ---------------------------------------------------------------------------
# joint and marginal densities from 0

def _occupation_exponent(params: DriftParams, x: float, t: float, v: float, u: float,
                         printed: bool) -> float:
    # v: time positive before the last zero at u; the last excursion lasts t - u
    m1sq, m2sq = params.m1 ** 2, params.m2 ** 2
    if x > 0 and not printed:
        return 0.5 * (m1sq * (v + t - u) + m2sq * (u - v))
    return 0.5 * (m1sq * v + m2sq * (t - v))


def joint_density_from_zero(params: DriftParams, t: float, x: float, l: float,
                            spec: QuadratureSpec = DEFAULT_SPEC, *, method: str = "occupation",
                            printed_exponent: bool = False, full_output: bool = False):
    """Joint density of ``(Y_t, L_t)`` at ``(x, l)`` for the process started at 0.

    ``method="occupation"`` (default) merges the final excursion into the
    clock of its sign, leaving one integral over the positive occupation
    time.  ``method="simplex"`` evaluates the original double integral over
    ``0 < v < u < t``, where ``v`` is the time spent positive before the
    last visit ``u`` to 0; it is far slower and serves as a cross-check.

    The occupation weight charges ``m1^2`` on all time spent positive,
    including the final excursion when ``x > 0``.  ``printed_exponent=True``
    charges that final excursion with ``m2^2`` instead, which is only right
    when ``|m1| == |m2|``.
    """
    _check_t(t)
    if l == 0 or x == 0:
        raise DampingViolation("l = 0 or x = 0 leaves the simplex singularities undamped")
    if not l > 0:
        raise ValueError(f"l must be positive, got {l}")
    if method == "occupation":
        return _joint_occupation(params, t, x, l, spec, printed_exponent, full_output)
    if method != "simplex":
        raise ValueError(f"unknown method {method!r}")
    p = params.p
    ax = abs(x)
    const = skew_weight_at(params, x) * l * l * p * (1.0 - p) * ax / (math.sqrt(2.0) * math.pi ** 1.5)
    lead = drift_potential(params, x) - params.beta * l
    a_pos, a_neg = (l * p) ** 2, (l * (1.0 - p)) ** 2

    def f(v, u):
        w = u - v
        r = t - u
        if v <= 0.0 or w <= 0.0 or r <= 0.0:
            return 0.0
        expo = (-0.5 * (a_pos / v + a_neg / w) - ax * ax / (2.0 * r)
                - _occupation_exponent(params, x, t, v, u, printed_exponent) + lead)
        return const * math.exp(expo) / (v * w * r) ** 1.5

    res = integrate_2d_simplex(f, t, spec)
    return _result(res, full_output, "joint density")


def _first_passage(a: float, s: float) -> float:
    return a / math.sqrt(TWO_PI * s ** 3) * math.exp(-a * a / (2.0 * s))


def _joint_occupation(params, t, x, l, spec, printed, full_output):
    _, cpos, cneg = _marginal_clocks(params, x, printed)
    a_pos = cpos + l * params.p
    a_neg = cneg + l * (1.0 - params.p)
    h1, h2 = 0.5 * params.m1 ** 2, 0.5 * params.m2 ** 2
    half = 0.5 * t
    c = math.sqrt(2.0 / math.pi)

    # int f_a(s) g(s) ds over (0, half) becomes, with u = a / sqrt(s),
    # int_{a/sqrt(half)}^inf sqrt(2/pi) exp(-u^2/2) g(a^2/u^2) du; this stays
    # smooth however small a is, where f_a itself is a spike of width a^2
    def left(u):
        P = a_pos * a_pos / (u * u)
        N = t - P
        return c * math.exp(-0.5 * u * u - h1 * P - h2 * N) * _first_passage(a_neg, N)

    def right(u):
        N = a_neg * a_neg / (u * u)
        P = t - N
        return c * math.exp(-0.5 * u * u - h1 * P - h2 * N) * _first_passage(a_pos, P)

    r1 = integrate_semi_infinite(left, a_pos / math.sqrt(half), spec)
    r2 = integrate_semi_infinite(right, a_neg / math.sqrt(half), spec)
    res = QuadResult(r1.value + r2.value, r1.error + r2.error, r1.converged and r2.converged)
    w = 2.0 * skew_weight_at(params, x) * math.exp(drift_potential(params, x) - params.beta * l)
    return _result(_scaled(res, w), full_output, "joint density")


def _marginal_clocks(params: DriftParams, x: float, printed: bool):
    # (prefactor, cpos, cneg) for the occupation form of p(t, 0, x)
    if x > 0:
        w = 2.0 * params.p * math.exp(params.m1 * x)
        return (w, 0.0, x) if printed else (w, x, 0.0)
    return 2.0 * (1.0 - params.p) * math.exp(params.m2 * x), 0.0, -x


def marginal_density_from_zero(params: DriftParams, t: float, x: float,
                               spec: QuadratureSpec = DEFAULT_SPEC, *,
                               method: str = "occupation", joint_method: str = "occupation",
                               printed_exponent: bool = False, full_output: bool = False):
    """Density ``p(t, 0, x)`` of ``Y_t`` for the process started at 0.

    ``method="occupation"`` integrates over the time spent positive with the
    local time integrated out analytically.  ``method="quadrature"``
    integrates :func:`joint_density_from_zero` (evaluated by
    ``joint_method``) over ``l`` numerically; it is meant for cross-checks,
    and with ``joint_method="simplex"`` it nests three adaptive levels and
    takes minutes.  ``x = 0`` is accepted by the occupation method (value of
    the ``x <= 0`` branch).
    """
    _check_t(t)
    if method == "occupation":
        w, cpos, cneg = _marginal_clocks(params, x, printed_exponent)
        res = _scaled(_occupation_integral(t, cpos, cneg, params, spec), w)
    elif method == "quadrature":
        if x == 0:
            raise DampingViolation("x = 0 leaves the simplex singularities undamped")
        inner = spec.tightened(10.0)
        errs = [0.0]

        def g(l):
            if l <= 0.0:
                return 0.0
            r = joint_density_from_zero(params, t, x, l, inner, method=joint_method,
                                        printed_exponent=printed_exponent, full_output=True)
            errs[0] = max(errs[0], r.error)
            return r.value

        res = integrate_semi_infinite(g, 0.0, spec, scale=math.sqrt(t))
        res = QuadResult(res.value, res.error + errs[0], res.converged)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _result(res, full_output, "marginal density")


# ---------------------------------------------------------------------------
# two-sided bounds

def _bound_parts(params: DriftParams, pt: SpaceTimePoint, literal: bool):
    # (integral term without the exp(-M t / 2) factor, killed term)
    t, x, y = pt.t, pt.x, pt.y
    if x == 0:
        raise ValueError("x = 0 is served by marginal_density_from_zero")
    m1, m2, p, beta = params.m1, params.m2, params.p, params.beta
    norm = 1.0 / math.sqrt(TWO_PI * t ** 3)
    killed = 0.0
    if x > 0 and y <= 0:
        c, w, lead = x - y, 2.0 * (1.0 - p), -m1 * x + m2 * y
    elif x > 0:
        c, w, lead = x + y, 2.0 * p, m1 * (y - x)
        killed = killed_density(params, t, x, y, time_free_exponent=literal)
    elif y >= 0:
        c, w, lead = y - x, 2.0 * p, -m2 * x + m1 * y
    else:
        c, w, lead = -x - y, 2.0 * (1.0 - p), m2 * (y - x)
        killed = killed_density(reflect(params), t, -x, -y, time_free_exponent=literal)
    base = w * norm * math.exp(lead) * laplace_gaussian_integral(c, beta, t)
    return base, killed


def _bound_factors(params: DriftParams, t: float):
    return math.exp(-0.5 * params.m_sup ** 2 * t), math.exp(-0.5 * params.m_star ** 2 * t)


def density_bounds(params: DriftParams, pt: SpaceTimePoint, *,
                   time_free_exponent: bool = False) -> DensityBounds:
    """Lower and upper bounds for ``p(t, x, y)``, ``x != 0``.

    Each bound is an explicit local-time integral (in closed form, see
    :func:`~sbmkit.numerics.laplace_gaussian_integral`) times
    ``exp(-M t / 2)`` with ``M = max(|m1|, |m2|)^2`` for the lower bound and
    ``min(|m1|, |m2|)^2`` for the upper one, plus the killed density when
    ``x`` and ``y`` share a sign.  The bounds coincide when
    ``|m1| == |m2|``.  ``time_free_exponent`` drops the ``t`` from the
    killing factor of the killed-density term.
    """
    base, killed = _bound_parts(params, pt, time_free_exponent)
    lo, hi = _bound_factors(params, pt.t)
    return DensityBounds(base * lo + killed, base * hi + killed)


def bound_integral_terms(params: DriftParams, pt: SpaceTimePoint) -> DensityBounds:
    """The bounds without the killed-density term.

    Their ratio is exactly ``exp((max^2 - min^2) t / 2)`` in every case.
    """
    base, _ = _bound_parts(params, pt, False)
    lo, hi = _bound_factors(params, pt.t)
    return DensityBounds(base * lo, base * hi)


# ---------------------------------------------------------------------------
# exact density

def exact_density(params: DriftParams, pt: SpaceTimePoint, spec: QuadratureSpec = DEFAULT_SPEC,
                  *, method: str = "occupation", full_output: bool = False):
    """Transition density ``p(t, x, y)``.

    Paths that have not reached 0 contribute the killed density; the rest
    are split at the first hitting time ``s`` of 0:
    ``p(t, x, y) = q(t, x, y) + int_0^t p(t - s, 0, y) P^x[sigma_0 in ds]``.

    ``method="convolution"`` evaluates that ``s``-integral numerically
    against :func:`marginal_density_from_zero`.  ``method="occupation"``
    (default) merges the hitting time into the positive-time clock, which
    leaves one integral.  ``x = 0`` delegates to the marginal from 0 and
    ``x < 0`` goes through the reflection map.
    """
    t, x, y = pt.t, pt.x, pt.y
    if x == 0:
        return marginal_density_from_zero(params, t, y, spec, full_output=full_output)
    if x < 0:
        return exact_density(reflect(params), reflect_point(pt), spec,
                             method=method, full_output=full_output)
    killed = killed_density(params, t, x, y) if y > 0 else 0.0
    if method == "occupation":
        if y > 0:
            w, cpos, cneg = 2.0 * params.p * math.exp(params.m1 * (y - x)), x + y, 0.0
        else:
            w, cpos, cneg = 2.0 * (1.0 - params.p) * math.exp(params.m2 * y - params.m1 * x), x, -y
        res = _scaled(_occupation_integral(t, cpos, cneg, params, spec), w)
    elif method == "convolution":
        inner = spec.tightened(10.0)
        errs = [0.0]

        def g(s):
            if s <= 0.0 or s >= t:
                return 0.0
            h = hitting_density(params, x, s)
            if h == 0.0:
                return 0.0
            r = marginal_density_from_zero(params, t - s, y, inner, full_output=True)
            errs[0] = max(errs[0], r.error)
            return r.value * h

        res = integrate_1d(g, 0.0, t, spec)
        res = QuadResult(res.value, res.error + errs[0], res.converged)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = QuadResult(res.value + killed, res.error, res.converged)
    return _result(res, full_output, "transition density")
