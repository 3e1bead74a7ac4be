"""Lower-tail machinery for the narrow-wedge KPZ equation.

Laplace-transform products over edge points (full line and half line) and
the two-sided tail bound formulas, all evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, TruncationError

__all__ = [
    "KpzParams",
    "ProductValue",
    "TailBounds",
    "TRUNCATION_MARGIN",
    "laplace_product",
    "laplace_product_halfspace",
    "bound_terms",
    "kpz1_bounds",
    "kpz2_bounds",
]

TRUNCATION_MARGIN = 40.0


@dataclass(frozen=True)
class KpzParams:
    """Tail depth ``s``, time ``T``, ``epsilon`` in (0, 1/3) and the free constants ``C``, ``K``.

    ``S`` is the (unknown) depth beyond which the bounds are claimed; results
    for ``s <= 0`` or ``s < S`` are flagged.
    """

    s: float
    T: float
    epsilon: float = 0.1
    C: float = 1.0
    K: float = 1.0
    S: float = 0.0

    def __post_init__(self):
        if not self.s >= 0:
            raise DomainError("s must be >= 0")
        if not self.T > 0:
            raise DomainError("T must be positive")
        if not 0 < self.epsilon < 1.0 / 3.0:
            raise DomainError("epsilon must lie in (0, 1/3)")
        if not (self.C > 0 and self.K > 0):
            raise DomainError("C and K must be positive")

    @property
    def t(self) -> float:
        return self.T ** (1.0 / 3.0)


class ProductValue(NamedTuple):
    value: float
    log_value: float
    truncation_bound: float


class TailBounds(NamedTuple):
    lower: float
    upper: float
    log_lower: float
    log_upper: float
    below_threshold: bool


def _points(points):
    a = np.asarray(points, dtype=np.float64).reshape(-1)
    if a.size > 1 and np.any(np.diff(a) > 0):
        raise DomainError("points must be descending")
    return a


def _airy_tail(depth, rate):
    """Bound on ``sum exp(-rate (y - depth))`` over points ``y >= depth`` of density ``sqrt(y)/pi``.

    Uses ``sqrt(y) <= sqrt(Y) + (y - Y)/(2 sqrt(Y))``.
    """
    Y = max(depth, 1e-12)
    return (math.sqrt(Y) / rate + 1.0 / (2.0 * math.sqrt(Y) * rate * rate)) / math.pi


def _required(level):
    return int(math.ceil(1.2 * 2.0 / (3.0 * math.pi) * max(level, 0.0) ** 1.5)) + 10


def laplace_product(points, s: float, T: float, check_truncation: bool = True) -> ProductValue:
    """``prod_k 1/(1 + exp(T^(1/3) (s + a_k)))`` over descending ``points``.

    Each log-factor is ``-log(1 + e^z)``, computed as ``-logaddexp(0, z)``.
    With ``check_truncation`` the last point must satisfy
    ``a_K < -s - 40 T^(-1/3)`` so every omitted factor is within ``e^-40``
    of 1; the returned bound on the omitted log-mass assumes the remaining
    points follow the Airy density ``sqrt(-a)/pi``.  An empty list means no
    points at all.
    """
    if not T > 0:
        raise DomainError("T must be positive")
    a = _points(points)
    t = T ** (1.0 / 3.0)
    bound = 0.0
    if check_truncation and a.size:
        level = -s - TRUNCATION_MARGIN / t
        if not a[-1] < level:
            raise TruncationError(
                f"last point {a[-1]:.6g} must lie below {level:.6g}; about {_required(-level)} points needed",
                required=_required(-level))
        bound = math.exp(t * (s + a[-1])) * _airy_tail(-a[-1], t)
    log_val = -math.fsum(np.logaddexp(0.0, t * (s + a)))
    return ProductValue(math.exp(log_val), log_val, bound)


def laplace_product_halfspace(points, u: float, T: float, check_truncation: bool = True) -> ProductValue:
    """``prod_k (1 + 4u exp(T^(1/3) a_k))^(-1/2)`` over descending ``points``.

    Truncation requires ``4u exp(T^(1/3) a_K) <= e^-40``, that is
    ``a_K <= (log(1/(4u)) - 40) T^(-1/3)``.  The identity this product
    enters takes points from the ``beta = 1`` spectrum; any points are accepted.
    """
    if not u > 0:
        raise DomainError("u must be positive")
    if not T > 0:
        raise DomainError("T must be positive")
    a = _points(points)
    t = T ** (1.0 / 3.0)
    bound = 0.0
    if check_truncation and a.size:
        level = (math.log(1.0 / (4.0 * u)) - TRUNCATION_MARGIN) / t
        if not a[-1] <= level:
            raise TruncationError(
                f"last point {a[-1]:.6g} must lie at or below {level:.6g}; about {_required(-level)} points needed",
                required=_required(-level))
        bound = 2.0 * u * math.exp(t * a[-1]) * _airy_tail(-a[-1], t)
    z = math.log(4.0 * u) + t * a
    log_val = -0.5 * math.fsum(np.logaddexp(0.0, z))
    return ProductValue(math.exp(log_val), log_val, bound)


def bound_terms(params: KpzParams, half_space: bool = False) -> dict:
    """Log of every exponential term of the upper and lower tail bounds."""
    s, t, e, C, K = params.s, params.t, params.epsilon, params.C, params.K
    if not C * e < 1:
        raise DomainError(f"C*epsilon = {C * e} must be < 1")
    c52 = (2.0 if half_space else 4.0) / (15.0 * math.pi)
    c3 = 1.0 / (24.0 if half_space else 12.0)
    return {
        "upper": [-c52 * (1 - C * e) * t * s ** 2.5, -K * s ** 3 - e * t * s, -c3 * (1 - C * e) * s ** 3],
        "lower": [-c52 * (1 + C * e) * t * s ** 2.5, -c3 * (1 + C * e) * s ** 3],
    }


def _bounds(params, half_space):
    terms = bound_terms(params, half_space)
    lu = float(logsumexp(terms["upper"]))
    ll = float(logsumexp(terms["lower"]))
    flag = params.s <= 0 or params.s < params.S
    return TailBounds(math.exp(ll), math.exp(lu), ll, lu, flag)


def kpz1_bounds(params: KpzParams) -> TailBounds:
    """Full-line lower-tail bounds (coefficients ``4/(15 pi)`` and ``1/12``)."""
    return _bounds(params, False)


def kpz2_bounds(params: KpzParams) -> TailBounds:
    """Half-line lower-tail bounds (coefficients ``2/(15 pi)`` and ``1/24``)."""
    return _bounds(params, True)
