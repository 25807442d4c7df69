"""
Special functions and adaptive quadrature shared by the density kernels.

The 1D integrator wraps QUADPACK (``scipy.integrate.quad``); everything on
top of it (the semi-infinite map, the iterated simplex rule, the Gaussian
Laplace integral) lives here.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
SQRTPI = math.sqrt(math.pi)


class NonConvergence(RuntimeError):
    """Adaptive quadrature ran out of subdivisions.

    The best available estimate is kept on the exception.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DampingViolation(ValueError):
    """An integrand singularity is not exponentially damped."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not 0.0 < self.abs_tol < 1.0:
            raise ValueError(f"abs_tol must be in (0, 1), got {self.abs_tol}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be a positive integer")

    def tightened(self, factor: float = 10.0) -> "QuadratureSpec":
        return QuadratureSpec(
            max(self.abs_tol / factor, 1e-300), max(self.rel_tol / factor, 1e-15), self.max_subdivisions
        )


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool

    def require(self, what="integral"):
        """Return the value, raising :class:`NonConvergence` if unconverged."""
        if not self.converged:
            raise NonConvergence(f"{what} did not converge (error {self.error:.3g})", self.value)
        return self.value


# ---------------------------------------------------------------------------
# Gaussian special functions

def gauss_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / SQRT2PI
    return out[()] if out.ndim == 0 else out


def gauss_sf(z):
    """Standard normal survival function ``P[N(0,1) > z]``, via ``erfc``."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * special.erfc(z / SQRT2)
    return out[()] if out.ndim == 0 else out


def _psi1(z: float) -> float:
    """``1 - sqrt(pi) z erfcx(z)`` for ``z >= 0`` without cancellation."""
    if z < 8.0:
        return 1.0 - SQRTPI * z * float(special.erfcx(z))
    # asymptotic series in 1/(2 z^2), truncated before the terms start growing
    u = 1.0 / (2.0 * z * z)
    total, term = 0.0, 1.0
    for k in range(1, 200):
        nxt = -term * (2 * k - 1) * u
        if abs(nxt) > abs(term):
            break
        term = nxt
        total -= term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def laplace_gaussian_integral(c: float, beta: float, t: float) -> float:
    """Closed form of ``I(c, beta, t) = int_0^inf (l+c) exp(-beta l - (l+c)^2/(2t)) dl``.

    Parameters
    ----------
    c : float
        Offset, ``c >= 0``.
    beta : float
        Exponential rate in ``l`` (any sign).
    t : float
        Time, ``t > 0``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if not c >= 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    sqt = math.sqrt(t)
    k = (c + beta * t) / sqt
    if beta >= 0.0:
        # I = t e^{-c^2/2t} [1 - beta sqrt(t) M(k)], M the Mills ratio; regrouped so
        # both terms are nonnegative
        denom = c + beta * t
        if denom == 0.0:
            return t
        bracket = c / denom + (beta * t / denom) * _psi1(k / SQRT2)
        return t * math.exp(-c * c / (2.0 * t)) * bracket
    # beta < 0: both terms of the textbook form are positive
    first = t * math.exp(-c * c / (2.0 * t))
    log_second = (
        beta * c
        + 0.5 * beta * beta * t
        # log of each factor separately: the product underflows for subnormal beta
        + math.log(-beta) + math.log(t * SQRT2PI * sqt)
        + float(special.log_ndtr(-k))
    )
    if log_second > 709.0:
        # beyond double range; the integral genuinely overflows
        return math.inf
    return first + math.exp(log_second)


def gauss_laplace_moments(A: float, B: float):
    """``(log_scale, j0, j1, j2)`` with ``int_0^inf l^k exp(-A l^2/2 - B l) dl = exp(log_scale) * jk``.

    ``A > 0``; ``B`` of either sign.  The scale factor absorbs the
    ``exp(B^2 / 2A)`` growth for strongly negative ``B``.
    """
    ra = math.sqrt(A)
    z = B / (SQRT2 * ra)
    b = SQRT2 * z
    if z >= 0.0:
        log_scale = 0.0
        if b >= 12.0:
            # H_k(b) = sum_j (-1/2)^j (k+2j)! / (j! b^{k+2j+1})
            h = [0.0, 0.0, 0.0]
            for kk in range(3):
                term = math.factorial(kk) / b ** (kk + 1)
                total = term
                for j in range(1, 40):
                    term *= -0.5 * (kk + 2 * j - 1) * (kk + 2 * j) / (j * b * b)
                    total += term
                    if abs(term) < 1e-17 * abs(total):
                        break
                h[kk] = total
            h0, h1, h2 = h
        else:
            h0 = math.sqrt(math.pi / 2.0) * float(special.erfcx(z))
            h1 = _psi1(z)
            h2 = h0 - b * h1
    else:
        # factor out e^{z^2}; erfc(z) in (1, 2) here
        log_scale = z * z
        h0 = math.sqrt(math.pi / 2.0) * math.erfc(z)
        h1 = math.exp(-z * z) - b * h0
        h2 = h0 - b * h1
    return log_scale, h0 / ra, h1 / A, h2 / (A * ra)


# ---------------------------------------------------------------------------
# Quadrature

def _quad(f, lo, hi, spec: QuadratureSpec, points=None) -> QuadResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f,
            lo,
            hi,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=int(spec.max_subdivisions),
            points=points,
            full_output=1,
        )
    value, err = out[0], out[1]
    # a QUADPACK warning (roundoff, slow extrapolation) is harmless when the
    # error estimate still meets the request
    met = err <= max(spec.abs_tol, spec.rel_tol * abs(value))
    converged = math.isfinite(value) and (len(out) == 3 or met)
    return QuadResult(float(value), float(err), converged)


def integrate_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    points=None,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    Integrable endpoint singularities are handled by the epsilon-algorithm
    extrapolation of QUADPACK's ``qags``.  ``points`` lists interior
    breakpoints.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    return _quad(f, lo, hi, spec, points)


def integrate_semi_infinite(
    f: Callable[[float], float],
    lo: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    scale: float = 1.0,
) -> QuadResult:
    """Integral of ``f`` over ``[lo, inf)``.

    Uses ``l = lo + scale * u / (1 - u)`` to map onto ``[0, 1)``; ``scale``
    should be of the order of the decay length of ``f``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")

    def g(u):
        if u >= 1.0:
            return 0.0
        w = 1.0 - u
        val = f(lo + scale * u / w)
        if val == 0.0:
            return 0.0
        return val * scale / (w * w)

    return _quad(g, 0.0, 1.0, spec)


def integrate_2d_simplex(
    f: Callable[[float, float], float],
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> QuadResult:
    """Iterated integral of ``f(v, u)`` over ``0 < v < u < t``.

    The inner integral runs over ``v`` in ``(0, u)`` and the outer one over
    ``u`` in ``(0, t)``; both levels are adaptive, so power-type
    singularities on the three edges are fine.  The reported error is the
    outer estimate plus ``t`` times the largest inner estimate.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    inner_errors = [0.0]
    inner_ok = [True]

    def outer(u):
        if u <= 0.0:
            return 0.0
        res = _quad(lambda v: f(v, u), 0.0, u, spec)
        if res.error > inner_errors[0]:
            inner_errors[0] = res.error
        inner_ok[0] = inner_ok[0] and res.converged
        return res.value

    res = _quad(outer, 0.0, t, spec)
    return QuadResult(res.value, res.error + t * inner_errors[0], res.converged and inner_ok[0])
