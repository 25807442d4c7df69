"""
Parameterization of skew Brownian motion with a two-valued drift.

The process solves ``dY = dB + m(Y) dt + (2p - 1) dL``, where ``L`` is the
symmetric local time at 0 and ``m`` equals ``m1`` on ``[0, inf)`` and ``m2``
on ``(-inf, 0)``.  This module holds the parameter type, the drift and skew
weights, the density of the symmetrizing measure, the canonical scale
function and the recurrence classifier.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Classification(enum.Enum):
    RECURRENT = "recurrent"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class DriftParams:
    """Drift pair and skewness of the process.

    Parameters
    ----------
    m1 : float
        Drift on ``[0, inf)``.
    m2 : float
        Drift on ``(-inf, 0)``.
    p : float
        Skewness, strictly inside ``(0, 1)``.  Excursions away from 0 are
        positive with probability ``p``.
    """

    m1: float
    m2: float
    p: float

    def __post_init__(self):
        for name in ("m1", "m2", "p"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"skewness p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "m1", float(self.m1))
        object.__setattr__(self, "m2", float(self.m2))
        object.__setattr__(self, "p", float(self.p))

    @property
    def m_star(self) -> float:
        """``min(|m1|, |m2|)``."""
        return min(abs(self.m1), abs(self.m2))

    @property
    def m_sup(self) -> float:
        """``max(|m1|, |m2|)``."""
        return max(abs(self.m1), abs(self.m2))

    @property
    def beta(self) -> float:
        """Rate of the exponential local-time weight, ``p*m1 - (1-p)*m2``."""
        return self.p * self.m1 - (1.0 - self.p) * self.m2

    @property
    def collapsed(self) -> bool:
        """True when ``|m1| == |m2|`` and the two density bounds coincide."""
        return abs(self.m1) == abs(self.m2)


def reflect(params: DriftParams) -> DriftParams:
    """Parameters of ``-Y``: ``(m1, m2, p) -> (-m2, -m1, 1 - p)``."""
    return DriftParams(-params.m2, -params.m1, 1.0 - params.p)


def drift_at(params: DriftParams, x: float) -> float:
    # x == 0 belongs to the m1 branch
    return params.m1 if x >= 0 else params.m2


def skew_weight_at(params: DriftParams, x: float) -> float:
    # x == 0 belongs to the (1 - p) branch
    return params.p if x > 0 else 1.0 - params.p


def drift_potential(params: DriftParams, x: float) -> float:
    """Antiderivative ``F(x) = x * m(x)`` of the drift, with ``F(0) = 0``."""
    return x * drift_at(params, x)


def classify(params: DriftParams) -> Classification:
    """Recurrent iff ``m1 <= 0`` and ``m2 >= 0``."""
    if params.m1 <= 0 and params.m2 >= 0:
        return Classification.RECURRENT
    return Classification.TRANSIENT


def symmetrizing_density(params: DriftParams, x: float) -> float:
    """Lebesgue density of the symmetrizing measure.

    ``exp(2 m1 x)`` on ``[0, inf)`` and ``(1-p)/p * exp(2 m2 x)`` on
    ``(-inf, 0)``.
    """
    if x >= 0:
        return math.exp(2.0 * params.m1 * x)
    return (1.0 - params.p) / params.p * math.exp(2.0 * params.m2 * x)


def _exp_ramp(m: float, x: float) -> float:
    # int_0^x exp(-2 m r) dr, stable for small m*x
    if m == 0.0:
        return x
    try:
        return -math.expm1(-2.0 * m * x) / (2.0 * m)
    except OverflowError:
        return math.copysign(math.inf, x)


def scale_function(params: DriftParams, x: float, *, inverted_skew_weight: bool = False) -> float:
    """Canonical scale function ``s(x) = int_0^x dr / rho(r)``.

    ``rho`` is :func:`symmetrizing_density`, so the negative branch carries
    the factor ``p / (1 - p)``.  With ``inverted_skew_weight=True`` the factor is
    ``(1 - p) / p`` instead; that variant is kept only for comparison, its
    exit probabilities disagree with simulation whenever ``p != 1/2``.
    """
    if x > 0:
        return _exp_ramp(params.m1, x)
    if x == 0:
        return 0.0
    ratio = (1.0 - params.p) / params.p if inverted_skew_weight else params.p / (1.0 - params.p)
    return ratio * _exp_ramp(params.m2, x)


def exit_probability(
    params: DriftParams, a: float, x: float, b: float, *, inverted_skew_weight: bool = False
) -> float:
    """Probability, started at ``x``, of hitting ``b`` before ``a``."""
    if not a < x < b:
        raise ValueError(f"need a < x < b, got a={a}, x={x}, b={b}")
    s = lambda z: scale_function(params, z, inverted_skew_weight=inverted_skew_weight)
    sa, sb = s(a), s(b)
    value = (s(x) - sa) / (sb - sa)
    return min(1.0, max(0.0, value))
