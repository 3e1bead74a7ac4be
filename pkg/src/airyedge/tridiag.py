"""Gaussian beta ensembles through the tridiagonal (Dumitriu-Edelman) model.

``H(i, i) = sqrt(2/beta) * N(0, 1)`` and ``H(i, i+1) = chi_{beta (n-i)} / sqrt(beta)``.
Spectra are obtained by Sturm-sequence bisection, eigenvectors by inverse
iteration (unit vectors) or by twisted factorisation in log-magnitude form
when the tail of the vector would underflow.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _tridiag_kernels as K
from .errors import DomainError, NumericalError
from .rng import replica_rng
from .spectra import classical_locations

__all__ = [
    "TridiagonalSym",
    "SpectrumSample",
    "LogVector",
    "DecayReport",
    "sample_gbeta",
    "sample_gbeta_batch",
    "count_below",
    "top_k_eigenvalues",
    "rescale_edge",
    "eigenvector",
    "eigenvector_log",
    "discrete_riccati",
    "decay_diagnostics",
    "rigidity_violations",
    "write_matrix_csv",
    "read_matrix_csv",
]


@dataclass(frozen=True)
class TridiagonalSym:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=np.float64)
        off = np.array(self.offdiag, dtype=np.float64)
        if diag.ndim != 1 or diag.size < 1:
            raise DomainError("diag must be a non-empty 1-d sequence")
        if off.shape != (diag.size - 1,):
            raise DomainError(f"offdiag must have length {diag.size - 1}, got {off.size}")
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def n(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def inf_norm(self) -> float:
        a = np.abs(self.diag).copy()
        a[:-1] += np.abs(self.offdiag)
        a[1:] += np.abs(self.offdiag)
        return float(a.max())


@dataclass(frozen=True)
class SpectrumSample:
    """Descending eigenvalues; ``rescaled`` marks edge-rescaled values."""

    values: np.ndarray
    n: int
    beta: float | None = None
    rescaled: bool = False


class LogVector(NamedTuple):
    """A vector stored as entrywise sign and natural log of the magnitude."""

    sign: np.ndarray
    logabs: np.ndarray

    def to_dense(self) -> np.ndarray:
        return self.sign * np.exp(self.logabs)


@dataclass(frozen=True)
class DecayReport:
    sign_constant_beyond: bool
    last_ratio: float
    decay_fit: float
    riccati_tail_negative: bool


def _check_beta(beta):
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")


def _draw(n, beta, rng):
    diag = math.sqrt(2.0 / beta) * rng.standard_normal(n)
    dof = beta * np.arange(n - 1, 0, -1, dtype=np.float64)
    off = np.sqrt(2.0 * rng.gamma(dof / 2.0)) / math.sqrt(beta)
    return diag, off


def sample_gbeta(n: int, beta: float, seed=0, replica: int = 0) -> TridiagonalSym:
    """One GbetaE matrix drawn from the stream ``(seed, replica)``.

    ``seed`` may also be a ``numpy.random.Generator``.  Chi variables are
    drawn as ``sqrt(2 * Gamma(dof/2))``, which accepts any real ``beta > 0``.
    """
    _check_beta(beta)
    if n < 2:
        raise DomainError("sample_gbeta needs n >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else replica_rng(seed, replica)
    return TridiagonalSym(*_draw(int(n), float(beta), rng))


def sample_gbeta_batch(n: int, beta: float, seed, start: int, stop: int, substream: int = 0):
    """Arrays ``(diag, off)`` of shape ``(stop-start, n)`` / ``(stop-start, n-1)`` for replicas ``start..stop-1``."""
    _check_beta(beta)
    if n < 2:
        raise DomainError("sample_gbeta needs n >= 2")
    B = stop - start
    diag = np.empty((B, n))
    off = np.empty((B, n - 1))
    for r in range(B):
        diag[r], off[r] = _draw(int(n), float(beta), replica_rng(seed, start + r, substream))
    return diag, off


def _as_batch(T: TridiagonalSym):
    return T.diag[None, :], T.offdiag[None, :] ** 2


def count_below(T: TridiagonalSym, x) -> int | np.ndarray:
    """Number of eigenvalues of ``T`` below ``x`` by the LDL^T pivot recursion.

    An exactly zero pivot is replaced by ``-1e-300`` and counted as
    negative, so at an exact eigenvalue the count includes it.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    diag, off2 = _as_batch(T)
    out = K.sturm_counts(diag, off2, xs[None, :])[0]
    return int(out[0]) if np.ndim(x) == 0 else out


def _brackets(diag, off2, max_widenings=10):
    """Gershgorin intervals, padded and widened until the Sturm counts confirm them."""
    B, n = diag.shape
    e = np.sqrt(off2)
    radius = np.zeros((B, n))
    radius[:, :-1] += e
    radius[:, 1:] += e
    lo = np.min(diag - radius, axis=1)
    hi = np.max(diag + radius, axis=1)
    half = 1e-12 * np.maximum(np.maximum(np.abs(lo), np.abs(hi)), 1.0)
    lo, hi = lo - half, hi + half
    for _ in range(max_widenings + 1):
        counts = K.sturm_counts(diag, off2, np.stack([lo, hi], axis=1))
        bad_lo = counts[:, 0] != 0
        bad_hi = counts[:, 1] != n
        if not (bad_lo.any() or bad_hi.any()):
            return lo, hi
        lo = np.where(bad_lo, lo - half, lo)
        hi = np.where(bad_hi, hi + half, hi)
        half = half * 2.0
    raise NumericalError("eigenvalue bracket not found after 10 widenings")


def top_k_batch(diag, off, k: int, tol: float = 1e-10) -> np.ndarray:
    """Top ``k`` eigenvalues (descending) for a batch of matrices."""
    diag = np.asarray(diag, dtype=np.float64)
    off2 = np.asarray(off, dtype=np.float64) ** 2
    n = diag.shape[1]
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = _brackets(diag, off2)
    ranks = np.arange(n - 1, n - 1 - k, -1)
    return K.bisect_eigenvalues(diag, off2, ranks, lo, hi, tol)


def top_k_eigenvalues(T: TridiagonalSym, k: int, tol: float = 1e-10) -> SpectrumSample:
    """The ``k`` largest eigenvalues by bisection on Sturm counts, each to width ``tol``."""
    vals = top_k_batch(T.diag[None, :], T.offdiag[None, :], k, tol)[0]
    return SpectrumSample(values=vals, n=T.n)


def rescale_edge(values, n: int) -> np.ndarray:
    """Edge rescaling ``(lambda - 2 sqrt(n)) * n^(1/6)``."""
    return (np.asarray(values, dtype=np.float64) - 2.0 * math.sqrt(n)) * n ** (1.0 / 6.0)


def eigenvector(T: TridiagonalSym, eigenvalue_estimate: float, max_iter: int = 20) -> np.ndarray:
    """Unit eigenvector by inverse iteration with a pivoted tridiagonal solve.

    Sign convention: the first nonzero entry is positive.
    """
    n = T.n
    norm = T.inf_norm() or 1.0
    if n == 1:
        return np.ones(1)
    lam = float(eigenvalue_estimate)
    shifted = T.diag - lam
    off = np.ascontiguousarray(T.offdiag)
    tiny = np.finfo(float).eps * norm
    v = np.ones(n) / math.sqrt(n)
    v[::2] *= 1.0 + 1e-3  # break symmetry with eigenvectors orthogonal to ones
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        y = K.tridiag_solve_pivoted(off, np.ascontiguousarray(shifted), off, v, tiny)
        v = y / np.linalg.norm(y)
        residual = _matvec(T, v) - lam * v
        if np.linalg.norm(residual) <= 1e-8 * norm:
            nz = np.flatnonzero(v)
            return v if v[nz[0]] > 0 else -v
    raise NumericalError("inverse iteration did not converge in 20 iterations")


def _matvec(T, v):
    out = T.diag * v
    out[:-1] += T.offdiag * v[1:]
    out[1:] += T.offdiag * v[:-1]
    return out


def eigenvector_log(T: TridiagonalSym, eigenvalue: float) -> LogVector:
    """Unit eigenvector in ``(sign, log|phi|)`` form (no underflow in the tail)."""
    sign, logabs = eigenvector_log_batch(T.diag[None, :], T.offdiag[None, :], np.array([eigenvalue]))
    return LogVector(sign[0], logabs[0])


def eigenvector_log_batch(diag, off, lam):
    sign, logabs = K.eigvec_log(diag, off, lam)
    top = logabs.max(axis=1, keepdims=True)
    logabs = logabs - top - 0.5 * np.log(np.sum(np.exp(2.0 * (logabs - top)), axis=1, keepdims=True))
    sign = sign * sign[:, :1]
    return sign, logabs


def _ratios(phi):
    """``phi(i)/phi(i-1)`` for 1-based ``i = 2..n`` (NaN where ``phi(i-1) = 0``)."""
    if isinstance(phi, LogVector):
        s, la = np.asarray(phi.sign), np.asarray(phi.logabs)
        return s[1:] * s[:-1] * np.exp(la[1:] - la[:-1])
    phi = np.asarray(phi, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = phi[1:] / phi[:-1]
    r[phi[:-1] == 0.0] = np.nan
    return r


def discrete_riccati(phi, n: int) -> np.ndarray:
    """``p(i) = n^(1/3) (phi(i) - phi(i-1)) / phi(i-1)`` for ``i = 2..n``; gaps are NaN."""
    return n ** (1.0 / 3.0) * (_ratios(phi) - 1.0)


def decay_diagnostics(phi, n: int, i_star: int) -> DecayReport:
    """Sign constancy on ``[i_star, n]``, last ratio and log-decay slope of an eigenvector."""
    if isinstance(phi, LogVector):
        sign, logabs = np.asarray(phi.sign), np.asarray(phi.logabs)
    else:
        phi = np.asarray(phi, dtype=np.float64)
        sign = np.sign(phi)
        with np.errstate(divide="ignore"):
            logabs = np.log(np.abs(phi))
    i_star = int(i_star)
    if not 1 <= i_star < n:
        raise DomainError("need 1 <= i_star < n")
    tail = sign[i_star - 1:]
    sign_constant = bool(np.all(tail == tail[0]) and tail[0] != 0)
    last_ratio = float(np.exp(logabs[-1] - logabs[-2]))
    idx = np.arange(i_star, n)  # 1-based i_star..n-1
    t = (idx * n ** (-1.0 / 3.0)) ** 1.5
    y = logabs[idx - 1]
    ok = np.isfinite(y)
    if ok.sum() >= 2:
        slope = float(np.polyfit(t[ok], y[ok], 1)[0])
    else:
        slope = math.nan
    p = discrete_riccati(LogVector(sign, logabs), n)
    p = p[np.isfinite(p)]
    changes = np.flatnonzero(np.sign(p[1:]) != np.sign(p[:-1]))
    beyond = p[changes[-1] + 1:] if changes.size else p
    return DecayReport(sign_constant, last_ratio, slope, bool(beyond.size and np.all(beyond < 0)))


def rigidity_violations(diag, off, a_values) -> np.ndarray:
    """Fraction of indices ``k`` with ``|lambda_k/sqrt(n) - gamma_k| >= n^(a-2/3) khat^(-1/3)``.

    Decided exactly from Sturm counts at the two ends of each tolerance
    window, so no eigenvalue is extracted.  Returns shape ``(B, len(a_values))``.
    """
    diag = np.atleast_2d(np.asarray(diag, dtype=np.float64))
    off2 = np.atleast_2d(np.asarray(off, dtype=np.float64)) ** 2
    B, n = diag.shape
    k = np.arange(1, n + 1)
    khat = np.minimum(k, n + 1 - k)
    gamma = classical_locations(n)
    root = math.sqrt(n)
    out = np.empty((B, len(a_values)))
    for col, a in enumerate(a_values):
        if not 0 < a <= 1:
            raise DomainError("rigidity exponent a must lie in (0, 1]")
        thr = n ** (a - 2.0 / 3.0) * khat ** (-1.0 / 3.0)
        shifts = np.concatenate([root * (gamma - thr), root * (gamma + thr)])
        counts = K.sturm_counts(diag, off2, np.broadcast_to(shifts, (B, 2 * n)))
        above_lo = n - counts[:, :n]   # eigenvalues >= lower end
        above_hi = n - counts[:, n:]   # eigenvalues >= upper end
        too_low = above_lo < k[None, :]
        too_high = above_hi >= k[None, :]
        out[:, col] = np.mean(too_low | too_high, axis=1)
    return out


def write_matrix_csv(T: TridiagonalSym, path) -> None:
    """Two columns ``diag,offdiag``; the last row's offdiag cell is empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["diag", "offdiag"])
        for i, d in enumerate(T.diag):
            w.writerow([repr(float(d)), repr(float(T.offdiag[i])) if i < T.n - 1 else ""])


def read_matrix_csv(path) -> TridiagonalSym:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["diag", "offdiag"]:
        raise ValueError(f"{path}: expected header diag,offdiag")
    diag = [float(r[0]) for r in rows[1:]]
    off = [float(r[1]) for r in rows[1:] if r[1] != ""]
    return TridiagonalSym(diag, off)
