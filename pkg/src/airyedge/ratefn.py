"""Rate functionals on signed measures.

Log-kernel double integrals are split into atom-atom sums, atom-density
line integrals and a density-density double integral.  Every line integral
is cut at the kernel's non-smooth points (``y = x``, or ``y = x +- delta``
for the truncated kernel) and at the density's breakpoints, and each piece
is integrated with Gauss-Legendre panels graded geometrically towards both
ends, which resolves the logarithmic and square-root endpoint behaviour.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .measures import SignedMeasure, mass
from .spectra import xi_tilde

__all__ = [
    "RateParams",
    "rate_I",
    "interaction_term",
    "potential_term",
    "rate_I1_upper",
    "PsiTrace",
    "psi_and_I2",
    "psi_value",
    "phi_minus",
    "log_energy_J",
    "log_energy_J0",
    "cross_J",
]


@dataclass(frozen=True)
class RateParams:
    """``R0``, ``R1`` >= 1 and ``c_prop22``, a free positive constant (default 1.0, not a known value)."""

    R0: float = 1.0
    R1: float = 1.0
    c_prop22: float = 1.0

    def __post_init__(self):
        if not (1 <= self.R0 < math.inf and 1 <= self.R1 < math.inf):
            raise DomainError("R0 and R1 must be finite and >= 1")
        if not self.c_prop22 > 0:
            raise DomainError("c_prop22 must be positive")


# -- graded Gauss-Legendre ---------------------------------------------------

@functools.lru_cache(maxsize=8)
def _unit_rule(order=16, levels=14, ratio=0.2):
    """Nodes/weights on ``[0, 1]`` with panels shrinking geometrically towards 0 and 1."""
    g, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    half = [0.5 * ratio ** j for j in range(levels)] + [0.0]
    left = np.array(half[::-1])            # 0, tiny, ..., 0.5
    edges = np.concatenate([left, 1.0 - left[-2::-1]])
    a, b = edges[:-1], edges[1:]
    nodes = (a[:, None] + (b - a)[:, None] * g[None, :]).reshape(-1)
    weights = ((b - a)[:, None] * w[None, :]).reshape(-1)
    return nodes, weights


def _map_rule(a, b):
    t, w = _unit_rule()
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    # measure nodes from the nearer end so the tiny graded offsets survive rounding
    x = np.where(t < 0.5, a + (b - a) * t, b - (b - a) * (1.0 - t))
    return x.reshape(-1), ((b - a) * w).reshape(-1)


def _pieces_rule(cuts):
    """Graded nodes/weights on consecutive pieces ``[cuts[i], cuts[i+1]]``."""
    cuts = np.asarray(cuts, dtype=float)
    a, b = cuts[:-1], cuts[1:]
    keep = b > a
    return _map_rule(a[keep], b[keep])


def _log_dist(x, ys):
    d = np.abs(x - ys)
    # a node that rounds onto the singular point carries negligible weight
    return np.log(np.where(d > 0, d, 1.0))


def _kernel(d, delta):
    """``log(max(|d|, delta))``; with ``delta = 0`` the plain log."""
    d = np.abs(d)
    if delta > 0:
        d = np.maximum(d, delta)
    with np.errstate(divide="ignore"):
        return np.log(d)


def _density_interval(mu: SignedMeasure, lo: float, hi: float):
    if mu.density is None:
        return None
    a, b = max(lo, mu.window[0]), min(hi, mu.window[1])
    s0, s1 = mu.density.support
    a, b = max(a, s0), min(b, s1)
    return (a, b) if b > a else None


def _cuts(mu, a, b, extra):
    pts = [a, b] + [p for p in mu.breakpoints() if a < p < b] + [p for p in extra if a < p < b]
    return np.unique(pts)


def _potential(mu, x, lo, hi, delta):
    """``integral log(max(|x-y|, delta)) g(y) dy`` over the density of ``mu`` on ``[lo, hi]``."""
    span = _density_interval(mu, lo, hi)
    if span is None:
        return 0.0
    a, b = span
    if delta > 0:
        inner_a, inner_b = max(a, x - delta), min(b, x + delta)
        total = 0.0
        if inner_b > inner_a:
            total += math.log(delta) * mu.density_mass(inner_a, inner_b)
        cuts = _cuts(mu, a, b, (x - delta, x + delta))
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        outside = np.abs(mids - x) >= delta
        pieces = [(u, v) for u, v, o in zip(cuts[:-1], cuts[1:], outside) if o]
        if pieces:
            ys, ws = _map_rule([p[0] for p in pieces], [p[1] for p in pieces])
            total += float(np.sum(ws * mu.density_pdf(ys) * _log_dist(x, ys)))
        return total
    cuts = _cuts(mu, a, b, (x,))
    ys, ws = _pieces_rule(cuts)
    return float(np.sum(ws * mu.density_pdf(ys) * _log_dist(x, ys)))


def _atoms_in(mu, lo, hi):
    keep = (mu.positions >= lo) & (mu.positions <= hi)
    return mu.positions[keep], mu.weights[keep]


def _log_interaction(mu, nu, lo, hi, delta, include_diagonal):
    """``integral integral log(max(|x-y|, delta)) dmu(x) dnu(y)`` over ``[lo, hi]^2``.

    With ``include_diagonal=False`` coincident atom pairs are left out.
    """
    xa, wa = _atoms_in(mu, lo, hi)
    ya, wb = _atoms_in(nu, lo, hi)
    total = 0.0
    if xa.size and ya.size:
        K = _kernel(xa[:, None] - ya[None, :], delta)
        W = wa[:, None] * wb[None, :]
        same = xa[:, None] == ya[None, :]
        if not include_diagonal:
            K = np.where(same, 0.0, K)
        elif delta <= 0 and np.any(same):
            return -math.inf  # log 0 on the diagonal
        total += math.fsum((W * K).ravel())
    for pos, wts, other in ((xa, wa, nu), (ya, wb, mu)):
        for x, w in zip(pos, wts):
            total += w * _potential(other, x, lo, hi, delta)
    span = _density_interval(mu, lo, hi)
    if span is not None and _density_interval(nu, lo, hi) is not None:
        a, b = span
        extra = list(nu.breakpoints())
        if delta > 0:
            extra += [p + s for p in nu.breakpoints() for s in (-delta, delta)]
        xs, ws = _pieces_rule(_cuts(mu, a, b, extra))
        g = mu.density_pdf(xs)
        nz = g != 0
        inner = np.array([_potential(nu, x, lo, hi, delta) for x in xs[nz]])
        total += float(np.sum(ws[nz] * g[nz] * inner))
    return total


def interaction_term(mu: SignedMeasure, params: RateParams) -> float:
    """``-integral log(max(|x-y|, R1^-3)) dmu dmu`` over ``[-R0, R0]^2`` (atoms self-interact)."""
    _check_covers(mu, params.R0)
    return -_log_interaction(mu, mu, -params.R0, params.R0, params.R1 ** -3.0, True)


def potential_term(mu: SignedMeasure, weight=None) -> float:
    """``integral_{x<0} weight(x) dmu(x)``; default weight ``(4/3)|x|^(3/2)``."""
    if weight is None:
        def weight(x):
            return 4.0 / 3.0 * np.abs(x) ** 1.5
    neg = mu.positions < 0
    total = math.fsum(mu.weights[neg] * weight(mu.positions[neg])) if neg.any() else 0.0
    span = _density_interval(mu, mu.window[0], 0.0)
    if span is not None:
        xs, ws = _pieces_rule(_cuts(mu, span[0], span[1], ()))
        total += float(np.sum(ws * mu.density_pdf(xs) * weight(xs)))
    return total


def _check_covers(mu, R0):
    lo, hi = mu.window
    if lo > -R0 + 1e-12 or hi < R0 - 1e-12:
        raise DomainError(f"measure window {mu.window} does not cover [-{R0}, {R0}]")


def rate_I(mu: SignedMeasure, params: RateParams) -> float:
    """Truncated log-interaction over ``[-R0, R0]^2`` plus the ``(4/3)|x|^(3/2)`` potential on ``x < 0``."""
    return interaction_term(mu, params) + potential_term(mu)


def rate_I1_upper(mu: SignedMeasure, extension: SignedMeasure, R0: float, tol: float = 1e-9) -> float:
    """Upper bound for the extension-infimum rate: the untruncated functional of one extension.

    ``extension`` must agree with ``mu`` on ``[-R0, R0]`` and have total
    mass zero.  Any atom makes the untruncated self-interaction infinite,
    so the bound is then ``inf``.
    """
    _check_covers(mu, R0)
    xa, wa = _atoms_in(extension, -R0, R0)
    ya, wb = _atoms_in(mu, -R0, R0)
    same_atoms = np.array_equal(xa, ya) and np.allclose(wa, wb, atol=tol)
    same_density = abs(extension.density_mass(-R0, R0) - mu.density_mass(-R0, R0)) <= tol
    if not (same_atoms and same_density):
        raise DomainError("extension does not restrict to mu on [-R0, R0]")
    total_mass = mass(extension, *extension.window)
    if abs(total_mass) > tol:
        raise DomainError(f"extension must have total mass 0, got {total_mass}")
    if extension.positions.size:
        return math.inf
    lo, hi = extension.window
    return -_log_interaction(extension, extension, lo, hi, 0.0, True) + potential_term(extension)


# -- psi and I2 ------------------------------------------------------------------

class PsiTrace(NamedTuple):
    x: np.ndarray
    psi: np.ndarray
    I2: float


def psi_value(x: float, phi: float, R0: float, c: float) -> float:
    """Two-branch ``psi`` for a given cumulative mass ``phi = mu([-R0, x])``."""
    if x < 0:
        return 2.0 / 3.0 * abs(x) ** 1.5 * abs(phi)
    if phi == 0.0:
        return 0.0  # x^(3/2)/|phi| is +inf, so the log term vanishes
    first = 2.0 / 3.0 * R0 ** 1.5 * abs(phi)
    ratio = x ** 1.5 / abs(phi)
    second = c / 8.0 * min(phi * phi, x ** 3 / 6.0) / math.log(max(2.0, ratio))
    return min(first, second)


def psi_and_I2(mu: SignedMeasure, params: RateParams, grid: int = 2048) -> PsiTrace:
    """``psi_mu`` on a uniform grid of ``[-R0, R0]`` plus the atom positions; ``I2`` is its maximum.

    At every atom the left limit of the cumulative mass is evaluated too,
    so jumps cannot hide the supremum.
    """
    R0 = params.R0
    _check_covers(mu, R0)
    xs = list(np.linspace(-R0, R0, grid))
    atoms = [float(p) for p in mu.positions if -R0 <= p <= R0]
    pts = [(x, mass(mu, -R0, x)) for x in xs]
    for p in atoms:
        full = mass(mu, -R0, p)
        at = math.fsum(mu.weights[mu.positions == p])
        pts.append((p, full))
        pts.append((p, full - at))
    pts.sort(key=lambda t: t[0])
    x = np.array([t[0] for t in pts])
    psi = np.array([psi_value(t[0], t[1], R0, params.c_prop22) for t in pts])
    return PsiTrace(x, psi, float(psi.max()))


# -- Phi_minus -------------------------------------------------------------------

def phi_minus(z):
    """Half-space lower-tail rate ``4/(15 pi^6)((1 - pi^2 z)^(5/2) - 1) + 2z/(3 pi^4) - z^2/(2 pi^2)``."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 0):
        raise DomainError("phi_minus is defined for z <= 0")
    p2, p4, p6 = math.pi ** 2, math.pi ** 4, math.pi ** 6
    # (1+u)^(5/2) - 1 via expm1/log1p keeps full relative accuracy near z = 0
    head = 4.0 / (15.0 * p6) * np.expm1(2.5 * np.log1p(-p2 * z_arr))
    out = head + 2.0 / (3.0 * p4) * z_arr - z_arr * z_arr / (2.0 * p2)
    return float(out) if out.ndim == 0 else out


# -- log-energy functionals ----------------------------------------------------------

def _require_distinct(mu):
    if mu.positions.size > 1 and np.any(np.diff(mu.positions) == 0):
        raise DomainError("coincident atoms: the log-energy is infinite")


def log_energy_J(mu: SignedMeasure) -> float:
    """``-integral log|x-y| dmu dmu`` off the diagonal."""
    _require_distinct(mu)
    lo, hi = mu.window
    return -_log_interaction(mu, mu, lo, hi, 0.0, False)


def log_energy_J0(mu: SignedMeasure, n: int, k: int) -> float:
    """:func:`log_energy_J` plus twice the rescaled effective potential integrated over ``x < 0``."""
    return log_energy_J(mu) + 2.0 * potential_term(mu, weight=lambda x: xi_tilde(x, n, k))


def cross_J(mu1: SignedMeasure, mu2: SignedMeasure) -> float:
    """``-integral log|x-y| dmu1 dmu2`` off the diagonal."""
    lo = min(mu1.window[0], mu2.window[0])
    hi = max(mu1.window[1], mu2.window[1])
    return -_log_interaction(mu1, mu2, lo, hi, 0.0, False)
