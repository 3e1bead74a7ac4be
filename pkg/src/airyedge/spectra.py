"""Deterministic spectral data.

Eigenvalues of the Airy operator ``-d^2/dx^2 + x`` on the half line with a
Dirichlet condition at 0 (these are the negated zeros of Ai), the
semicircle classical locations, the effective potential ``xi`` and the
noiseless Riccati equation ``q' = x - a - q^2`` started from ``+inf``.
"""

from __future__ import annotations

import enum
import functools
import math

import numpy as np

from ._accel import njit
from .errors import DomainError, NumericalError

__all__ = [
    "AirySpectrumMode",
    "airy_ai",
    "airy_eigenvalue",
    "airy_count",
    "semicircle_cdf",
    "classical_location",
    "classical_locations",
    "xi",
    "xi_tilde",
    "riccati_ode_blowup",
]


class AirySpectrumMode(enum.Enum):
    ASYMPTOTIC = "asymptotic"
    EXACT = "exact"


_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = 1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
_SERIES_LIMIT = 5.0


def _ai_series(x: float) -> float:
    x3 = x * x * x
    f = g = 0.0
    tf, tg = 1.0, x
    k = 0
    while True:
        f += tf
        g += tg
        tf *= x3 / ((3 * k + 2) * (3 * k + 3))
        tg *= x3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        if abs(tf) + abs(tg) < 1e-17 * (abs(f) + abs(g)) or k > 200:
            break
    return _AI0 * f - _AIP0 * g


def _u_coefficients(count: int) -> list[float]:
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    return u


_U = _u_coefficients(40)


def _ai_asymptotic(x: float) -> float:
    z = abs(x)
    zeta = 2.0 / 3.0 * z ** 1.5
    if x > 0:
        total, term_prev = 0.0, math.inf
        for k, uk in enumerate(_U):
            term = (-1) ** k * uk / zeta ** k
            if abs(term) > abs(term_prev):
                break
            total += term
            term_prev = term
        return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * z ** 0.25) * total
    # oscillatory side: P and Q series truncated at their smallest term
    p = q = 0.0
    last = math.inf
    for k in range(len(_U) // 2):
        tp = (-1) ** k * _U[2 * k] / zeta ** (2 * k)
        tq = (-1) ** k * _U[2 * k + 1] / zeta ** (2 * k + 1)
        size = abs(tp) + abs(tq)
        if size > last:
            break
        p += tp
        q += tq
        last = size
    phase = zeta + math.pi / 4.0
    return (math.sin(phase) * p - math.cos(phase) * q) / (math.sqrt(math.pi) * z ** 0.25)


def airy_ai(x: float) -> float:
    """Airy function Ai: power series for ``|x| <= 5``, asymptotic expansion beyond."""
    x = float(x)
    if abs(x) <= _SERIES_LIMIT:
        return _ai_series(x)
    return _ai_asymptotic(x)


def _asymptotic_gamma(i: int) -> float:
    return (1.5 * math.pi * (i - 0.25)) ** (2.0 / 3.0)


@functools.lru_cache(maxsize=4096)
def _exact_gamma(i: int) -> float:
    guess = _asymptotic_gamma(i)
    lo, hi = guess - 0.2, guess + 0.2
    f_lo, f_hi = airy_ai(-lo), airy_ai(-hi)
    widen = 0
    while f_lo * f_hi > 0:
        widen += 1
        if widen > 10:
            raise NumericalError(f"could not bracket Airy zero {i}")
        lo, hi = lo - 0.1, hi + 0.1
        f_lo, f_hi = airy_ai(-lo), airy_ai(-hi)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        f_mid = airy_ai(-mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def airy_eigenvalue(i: int, mode: AirySpectrumMode = AirySpectrumMode.ASYMPTOTIC) -> float:
    """The ``i``-th eigenvalue ``gamma_i`` of the Airy operator.

    Asymptotic mode evaluates ``(3*pi*(i - 1/4)/2)**(2/3)``; exact mode
    bisects on Ai to absolute tolerance 1e-10.
    """
    if int(i) != i or i < 1:
        raise DomainError(f"Airy eigenvalue index must be a positive integer, got {i!r}")
    i = int(i)
    mode = AirySpectrumMode(mode)
    if mode is AirySpectrumMode.ASYMPTOTIC:
        return _asymptotic_gamma(i)
    return _exact_gamma(i)


def airy_count(lam: float, mode: AirySpectrumMode = AirySpectrumMode.ASYMPTOTIC) -> int:
    """``N_0(lam)``, the number of Airy-operator eigenvalues ``<= lam``."""
    mode = AirySpectrumMode(mode)
    if lam <= 0:
        return 0
    i = max(int(math.floor(2.0 / (3.0 * math.pi) * lam ** 1.5 + 0.25)), 0)
    while i >= 1 and airy_eigenvalue(i, mode) > lam:
        i -= 1
    while airy_eigenvalue(i + 1, mode) <= lam:
        i += 1
    return i


def semicircle_cdf(x):
    """Mass of the semicircle law ``sqrt(4 - t^2)/(2 pi)`` on ``(-inf, x]``."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = (x * np.sqrt(4.0 - x * x) / 4.0 + np.arcsin(x / 2.0)) / math.pi + 0.5
    return out if out.ndim else float(out)


def classical_locations(n: int, j=None, tol: float = 1e-12) -> np.ndarray:
    """Vectorised classical locations ``gamma_j^{(n)}`` (default: all ``j = 1..n``)."""
    n = int(n)
    j = np.arange(1, n + 1) if j is None else np.asarray(j)
    if np.any(j < 1) or np.any(j > n):
        raise DomainError(f"classical location index out of range 1..{n}")
    target = 1.0 - j / n
    lo = np.full(j.shape, -2.0)
    hi = np.full(j.shape, 2.0)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(2 * j == n, 0.0, out)
    return np.where(j == n, -2.0, out)


def classical_location(j: int, n: int) -> float:
    """Point ``gamma`` with semicircle mass ``j/n`` on ``[gamma, 2]``."""
    if not 1 <= j <= n:
        raise DomainError(f"need 1 <= j <= n, got j={j}, n={n}")
    return float(classical_locations(n, np.array([j]))[0])


def xi(x):
    """Effective potential: 0 on ``[-2, 2]``, even, with ``xi'(x) = sqrt(x^2 - 4)/2`` for ``x > 2``."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    big = x > 2.0
    xb = x[big]
    out[big] = xb / 4.0 * np.sqrt(xb * xb - 4.0) - np.arccosh(xb / 2.0)
    return out if out.ndim else float(out)


def xi_tilde(x, n, k):
    """Rescaled potential ``(n/k) * xi(2 - (k/n)^(2/3) x)``."""
    if not n >= k >= 1:
        raise DomainError("xi_tilde needs n >= k >= 1")
    x = np.asarray(x, dtype=float)
    return (n / k) * xi(2.0 - (k / n) ** (2.0 / 3.0) * x)


@njit
def _riccati_rhs(x, y, a, chart, frozen):
    drift = -a if frozen else x - a
    if chart == 0:
        return drift - y * y
    return -1.0 + drift * y * y


@njit
def _rk4(x, y, h, a, chart, frozen):
    k1 = _riccati_rhs(x, y, a, chart, frozen)
    k2 = _riccati_rhs(x + 0.5 * h, y + 0.5 * h * k1, a, chart, frozen)
    k3 = _riccati_rhs(x + 0.5 * h, y + 0.5 * h * k2, a, chart, frozen)
    k4 = _riccati_rhs(x + h, y + h * k3, a, chart, frozen)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit
def _ode_blowup_kernel(a, frozen, h, x_max):
    # chart 0 carries q, chart 1 carries w = -1/q; q = +inf is w = 0-
    switch = max(1.0, math.sqrt(a))
    x = 0.0
    chart = 1
    y = 0.0
    while x < x_max:
        y_new = _rk4(x, y, h, a, chart, frozen)
        if chart == 1 and y > 0.0 and y_new <= 0.0:
            lo, hi = 0.0, h
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if _rk4(x, y, mid, a, chart, frozen) > 0.0:
                    lo = mid
                else:
                    hi = mid
            return x + 0.5 * (lo + hi)
        x += h
        y = y_new
        if chart == 0 and abs(y) > switch:
            chart = 1
            y = -1.0 / y
        elif chart == 1 and y != 0.0 and abs(y) > 1.0 / switch:
            chart = 0
            y = -1.0 / y
    return math.inf


def riccati_ode_blowup(a: float, frozen: bool = False, step: float | None = None,
                       x_max: float | None = None) -> float:
    """First blow-up time of ``q' = x - a - q^2`` (or ``-a - q^2`` if ``frozen``) from ``q(0) = +inf``.

    Integrated by RK4 in the chart ``q`` while ``|q| <= sqrt(a)`` and in
    ``w = -1/q`` otherwise, so the pole at ``q = -inf`` is an ordinary zero
    crossing of ``w``.
    """
    if not a > 0:
        raise DomainError(f"riccati_ode_blowup needs a > 0, got {a}")
    if step is None:
        step = 2e-4 / max(1.0, math.sqrt(a))
    if x_max is None:
        x_max = 10.0 * math.pi / math.sqrt(a) + 10.0
    return float(_ode_blowup_kernel(float(a), bool(frozen), float(step), float(x_max)))
