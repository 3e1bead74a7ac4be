"""Signed measures on a window and the bounded-Lipschitz distance between them.

A :class:`SignedMeasure` is a finite list of weighted atoms plus at most one
signed reference density (``AiryReference``, ``SemicircleRescaled`` or
``UniformDensity``), restricted to a window ``[lo, hi]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import DomainError, NumericalError, TruncationError

__all__ = [
    "AiryReference",
    "SemicircleRescaled",
    "UniformDensity",
    "SignedMeasure",
    "BLResult",
    "nu_k",
    "mu_nk",
    "mass",
    "bl_distance",
    "node_weights",
    "measure_to_json",
    "measure_from_json",
]


def _sign(s):
    s = int(s)
    if s not in (-1, 1):
        raise DomainError("density sign must be +1 or -1")
    return s


@dataclass(frozen=True)
class AiryReference:
    """``sign * sqrt(x)/pi`` on ``x >= 0``."""

    sign: int = -1

    def __post_init__(self):
        object.__setattr__(self, "sign", _sign(self.sign))

    support = (0.0, math.inf)
    breakpoints = (0.0,)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.sign * np.sqrt(np.maximum(x, 0.0)) / math.pi

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return self.sign * 2.0 / (3.0 * math.pi) * x ** 1.5

    def params(self):
        return {"kind": "airy", "sign": self.sign}


@dataclass(frozen=True)
class SemicircleRescaled:
    """``sign * sqrt(x) sqrt(1 - c x)/pi`` on ``[0, 1/c]`` with ``c = (k/n)^(2/3)/4``.

    This is the semicircle law seen from its right edge in the ``b``
    coordinates of :func:`mu_nk`; its total mass is ``n/k``.
    """

    n: int
    k: int
    sign: int = -1

    def __post_init__(self):
        if not self.n >= self.k >= 1:
            raise DomainError("SemicircleRescaled needs n >= k >= 1")
        object.__setattr__(self, "sign", _sign(self.sign))

    @property
    def c(self) -> float:
        return 0.25 * (self.k / self.n) ** (2.0 / 3.0)

    @property
    def support(self):
        return (0.0, 1.0 / self.c)

    @property
    def breakpoints(self):
        return (0.0, 1.0 / self.c)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, 1.0 / self.c)
        val = np.sqrt(inside) * np.sqrt(np.maximum(1.0 - self.c * inside, 0.0)) / math.pi
        return self.sign * np.where((x >= 0) & (x <= 1.0 / self.c), val, 0.0)

    def cdf(self, x):
        u = np.clip(np.asarray(x, dtype=float) * self.c, 0.0, 1.0)
        g = (2 * u - 1) * np.sqrt(np.maximum(u - u * u, 0.0)) / 4 + np.arcsin(2 * u - 1) / 8 + math.pi / 16
        return self.sign * g / (math.pi * self.c ** 1.5)

    def params(self):
        return {"kind": "semicircle", "n": self.n, "k": self.k, "sign": self.sign}


@dataclass(frozen=True)
class UniformDensity:
    """Constant density ``height`` on ``[lo, hi]`` (height may be negative)."""

    lo: float
    hi: float
    height: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError("UniformDensity needs hi > lo")

    @property
    def sign(self):
        return 1 if self.height >= 0 else -1

    @property
    def support(self):
        return (self.lo, self.hi)

    @property
    def breakpoints(self):
        return (self.lo, self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.height, 0.0)

    def cdf(self, x):
        return self.height * (np.clip(np.asarray(x, dtype=float), self.lo, self.hi) - self.lo)

    def params(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi, "height": self.height}


def _density_from_params(p):
    if p is None:
        return None
    kind = p["kind"]
    if kind == "airy":
        return AiryReference(p["sign"])
    if kind == "semicircle":
        return SemicircleRescaled(p["n"], p["k"], p["sign"])
    if kind == "uniform":
        return UniformDensity(p["lo"], p["hi"], p["height"])
    raise ValueError(f"unknown density kind {kind!r}")


class SignedMeasure:
    """Atoms ``(positions, weights)`` plus an optional density, all restricted to ``window``.

    Atoms are kept sorted by position.  When the density is negative, atom
    weights must be positive (the measure plus the reflected reference is
    then a positive measure).
    """

    __slots__ = ("positions", "weights", "density", "window")

    def __init__(self, positions=(), weights=(), density=None, window=(-1.0, 1.0)):
        pos = np.asarray(positions, dtype=np.float64).reshape(-1)
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if pos.shape != w.shape:
            raise DomainError("positions and weights must have equal length")
        lo, hi = float(window[0]), float(window[1])
        if not hi > lo:
            raise DomainError("window must satisfy lo < hi")
        if np.any(pos < lo) or np.any(pos > hi):
            raise DomainError("atom outside the window")
        if density is not None and density.sign < 0 and np.any(w <= 0):
            raise DomainError("atoms must carry positive weight next to a negative density")
        order = np.argsort(pos, kind="stable")
        pos, w = pos[order], w[order]
        pos.setflags(write=False)
        w.setflags(write=False)
        self.positions, self.weights, self.density, self.window = pos, w, density, (lo, hi)

    def __repr__(self):
        return (f"SignedMeasure({self.positions.size} atoms, density={self.density!r}, "
                f"window={self.window})")

    def __eq__(self, other):
        return (isinstance(other, SignedMeasure) and self.window == other.window
                and self.density == other.density
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.weights, other.weights))

    def density_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.density is None:
            return np.zeros_like(x)
        lo, hi = self.window
        return np.where((x >= lo) & (x <= hi), self.density.pdf(x), 0.0)

    def density_mass(self, a, b):
        """Density integral over ``[a, b]`` intersected with the window."""
        if self.density is None:
            return 0.0
        lo, hi = self.window
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            return 0.0
        return float(self.density.cdf(b) - self.density.cdf(a))

    def breakpoints(self):
        """Window ends plus the density's non-smooth points inside the window."""
        lo, hi = self.window
        pts = {lo, hi}
        if self.density is not None:
            pts.update(p for p in self.density.breakpoints if lo < p < hi)
        return sorted(pts)

    def total_variation(self) -> float:
        tv = float(np.sum(np.abs(self.weights)))
        return tv + abs(self.density_mass(*self.window))

    def scaled(self, factor: float) -> "SignedMeasure":
        """Atom weights times ``factor``; only defined for measures without density."""
        if self.density is not None:
            raise DomainError("scaling is only supported for purely atomic measures")
        return SignedMeasure(self.positions, self.weights * factor, None, self.window)


def nu_k(points, k: int, R: float, check_truncation: bool = True) -> SignedMeasure:
    """Space-reversed, rescaled edge point measure minus the Airy reference density.

    Atoms at ``-k^(-2/3) a_i`` with weight ``1/k`` inside ``[-R, R]`` and
    density ``-sqrt(x)/pi`` on ``[0, R]``.  ``points`` are descending.  A
    non-empty list must reach past the window (``-k^(-2/3) a_K > R``),
    otherwise :class:`TruncationError` reports how many points would do.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if not R > 0:
        raise DomainError("R must be positive")
    a = np.asarray(points, dtype=np.float64).reshape(-1)
    if a.size > 1 and np.any(np.diff(a) > 0):
        raise DomainError("points must be descending")
    x = -a * k ** (-2.0 / 3.0)
    if check_truncation and a.size and not x[-1] > R:
        need = int(math.ceil(1.2 * 2.0 / (3.0 * math.pi) * k * (R + 1.0) ** 1.5)) + 10
        raise TruncationError(f"{a.size} points do not reach past R={R}; about {need} needed",
                              required=need)
    keep = (x >= -R) & (x <= R)
    return SignedMeasure(x[keep], np.full(keep.sum(), 1.0 / k), AiryReference(-1), (-R, R))


def mu_nk(eigs, n: int, k: int, R: float) -> SignedMeasure:
    """Edge-rescaled eigenvalue measure minus the rescaled semicircle density.

    Atoms at ``b_i = (n/k)^(2/3) (2 - lambda_i/sqrt(n))`` with weight ``1/k``
    inside ``[-R, R]``.
    """
    if not n >= k >= 1:
        raise DomainError("need n >= k >= 1")
    lam = np.asarray(eigs, dtype=np.float64).reshape(-1)
    b = (n / k) ** (2.0 / 3.0) * (2.0 - lam / math.sqrt(n))
    keep = (b >= -R) & (b <= R)
    return SignedMeasure(b[keep], np.full(keep.sum(), 1.0 / k), SemicircleRescaled(n, k, -1), (-R, R))


def mass(mu: SignedMeasure, a: float, b: float) -> float:
    """``mu([a, b])``: atoms in the closed interval plus the density integral."""
    lo, hi = mu.window
    if a < lo - 1e-12 or b > hi + 1e-12 or a > b:
        raise DomainError(f"[{a}, {b}] is not a sub-interval of the window {mu.window}")
    i0 = np.searchsorted(mu.positions, a, side="left")
    i1 = np.searchsorted(mu.positions, b, side="right")
    return math.fsum(mu.weights[i0:i1]) + mu.density_mass(a, b)


# -- bounded-Lipschitz distance ---------------------------------------------

class BLResult(NamedTuple):
    value: float
    error_bound: float
    h: float
    under_resolved: bool


_SIMPSON_PANELS = 8


def node_weights(mu: SignedMeasure, R: float, m: int) -> np.ndarray:
    """Integrals of the ``m+1`` hat functions on the uniform grid of ``[-R, R]`` against ``mu``.

    For a piecewise-linear ``f`` with node values ``f_j`` this gives
    ``integral f dmu = sum_j f_j w_j``.  An atom on a node goes wholly to it.
    """
    h = 2.0 * R / m
    w = np.zeros(m + 1)
    if mu.positions.size:
        s = (mu.positions + R) / h
        i = np.clip(np.floor(s).astype(np.int64), 0, m)
        frac = s - i
        frac[i == m] = 0.0
        right = np.minimum(i + 1, m)
        np.add.at(w, i, mu.weights * (1.0 - frac))
        np.add.at(w, right, mu.weights * frac)
    if mu.density is not None:
        w += _density_node_weights(mu, R, m, h)
    return w


def _density_node_weights(mu, R, m, h):
    nodes = -R + h * np.arange(m + 1)
    # split cells at density breakpoints so Simpson sees smooth pieces only
    cuts = np.array([p for p in mu.breakpoints() if -R < p < R])
    edges = np.union1d(nodes, cuts)
    a, b = edges[:-1], edges[1:]
    cell = np.clip(np.floor((0.5 * (a + b) + R) / h).astype(np.int64), 0, m - 1)
    t = np.linspace(0.0, 1.0, 2 * _SIMPSON_PANELS + 1)
    coef = np.ones(t.size)
    coef[1:-1:2] = 4.0
    coef[2:-1:2] = 2.0
    coef /= 3.0 * 2 * _SIMPSON_PANELS
    x = a[:, None] + (b - a)[:, None] * t[None, :]
    g = mu.density_pdf(x) * (b - a)[:, None]
    lam = (x - nodes[cell][:, None]) / h
    left = np.sum(coef * g * (1.0 - lam), axis=1)
    right = np.sum(coef * g * lam, axis=1)
    out = np.zeros(m + 1)
    np.add.at(out, cell, left)
    np.add.at(out, cell + 1, right)
    return out


def _atoms_too_close(mu, nu, h):
    pos = np.unique(np.concatenate([mu.positions, nu.positions]))
    return bool(pos.size > 1 and np.min(np.diff(pos)) < h)


def bl_distance(mu: SignedMeasure, nu: SignedMeasure, R: float, m: int = 1024,
                compact: bool = False) -> BLResult:
    """Bounded-Lipschitz distance on ``[-R, R]`` by a grid linear program.

    Maximises ``sum_j f_j (w_mu - w_nu)_j`` over node values with
    ``|f_j| <= 1`` and ``|f_{j+1} - f_j| <= h`` (HiGHS via scipy).  The
    piecewise-linear maximiser is admissible, so the value never exceeds
    the true distance, and interpolating any admissible ``f`` shows it
    falls short by at most ``(h/2)(|mu| + |nu|)``, the returned bound.
    ``compact`` pins ``f = 0`` at both ends.
    """
    if m < 64:
        raise DomainError("m must be >= 64")
    for meas in (mu, nu):
        lo, hi = meas.window
        if lo < -R - 1e-12 or hi > R + 1e-12:
            raise DomainError(f"measure window {meas.window} exceeds [-R, R] with R={R}")
    h = 2.0 * R / m
    c = node_weights(mu, R, m) - node_weights(nu, R, m)
    bound = 0.5 * h * (mu.total_variation() + nu.total_variation())
    flag = _atoms_too_close(mu, nu, h)
    if not np.any(c):
        return BLResult(0.0, bound, h, flag)
    rows = np.repeat(np.arange(m), 2)
    cols = np.stack([np.arange(m), np.arange(1, m + 1)], axis=1).reshape(-1)
    vals = np.tile([-1.0, 1.0], m)
    D = sparse.csr_matrix((vals, (rows, cols)), shape=(m, m + 1))
    A = sparse.vstack([D, -D]).tocsr()
    ub = np.full(2 * m, h)
    bounds = [(-1.0, 1.0)] * (m + 1)
    if compact:
        bounds[0] = bounds[-1] = (0.0, 0.0)
    res = linprog(-c, A_ub=A, b_ub=ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericalError(f"linear program failed: {res.message}")
    return BLResult(max(float(-res.fun), 0.0), bound, h, flag)


# -- serialisation ------------------------------------------------------------

def measure_to_json(mu: SignedMeasure) -> str:
    return json.dumps({
        "atoms": [[float(x), float(w)] for x, w in zip(mu.positions, mu.weights)],
        "density": None if mu.density is None else mu.density.params(),
        "window": list(mu.window),
    })


def measure_from_json(text: str) -> SignedMeasure:
    d = json.loads(text)
    atoms = d.get("atoms", [])
    pos = [a[0] for a in atoms]
    w = [a[1] for a in atoms]
    return SignedMeasure(pos, w, _density_from_params(d.get("density")), tuple(d["window"]))
