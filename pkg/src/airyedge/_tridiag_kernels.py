"""Hot loops for symmetric tridiagonal matrices, numba and numpy flavours.

Batched layout throughout: ``diag`` is ``(B, n)``, ``off`` / ``off2`` are
``(B, n-1)`` (off-diagonal and its square).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, use_numba

TINY = 1e-300


# -- Sturm counts -----------------------------------------------------------

@njit
def _sturm_one(diag, off2, x):
    n = diag.shape[0]
    d = diag[0] - x
    count = 0
    if d <= 0.0:
        count += 1
        if d == 0.0:
            d = -TINY
    for i in range(1, n):
        d = diag[i] - x - off2[i - 1] / d
        if d <= 0.0:
            count += 1
            if d == 0.0:
                d = -TINY
    return count


@njit
def _sturm_counts_nb(diag, off2, shifts):
    B = diag.shape[0]
    m = shifts.shape[1]
    out = np.empty((B, m), np.int64)
    for b in range(B):
        for j in range(m):
            out[b, j] = _sturm_one(diag[b], off2[b], shifts[b, j])
    return out


def _sturm_counts_np(diag, off2, shifts):
    n = diag.shape[1]
    d = diag[:, :1] - shifts
    neg = d <= 0.0
    count = neg.astype(np.int64)
    d = np.where(d == 0.0, -TINY, d)
    for i in range(1, n):
        d = diag[:, i:i + 1] - shifts - off2[:, i - 1:i] / d
        neg = d <= 0.0
        count += neg
        d[d == 0.0] = -TINY
    return count


def sturm_counts(diag, off2, shifts):
    """Number of eigenvalues below each shift (zero pivots counted as negative)."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off2 = np.ascontiguousarray(off2, dtype=np.float64)
    shifts = np.ascontiguousarray(shifts, dtype=np.float64)
    if use_numba():
        return _sturm_counts_nb(diag, off2, shifts)
    return _sturm_counts_np(diag, off2, shifts)


# -- bisection --------------------------------------------------------------

@njit
def _bisect_nb(diag, off2, ranks, lo, hi, tol):
    B = diag.shape[0]
    k = ranks.shape[0]
    out = np.empty((B, k), np.float64)
    for b in range(B):
        for j in range(k):
            a = lo[b]
            c = hi[b]
            r = ranks[j]
            while c - a > tol:
                mid = 0.5 * (a + c)
                if mid <= a or mid >= c:
                    break
                if _sturm_one(diag[b], off2[b], mid) > r:
                    c = mid
                else:
                    a = mid
            out[b, j] = 0.5 * (a + c)
    return out


def _bisect_np(diag, off2, ranks, lo, hi, tol):
    B = diag.shape[0]
    k = ranks.shape[0]
    a = np.repeat(lo[:, None], k, axis=1)
    c = np.repeat(hi[:, None], k, axis=1)
    width = float(np.max(hi - lo))
    steps = max(int(math.ceil(math.log2(width / tol))), 0) if width > tol else 0
    for _ in range(steps):
        mid = 0.5 * (a + c)
        above = _sturm_counts_np(diag, off2, mid) > ranks[None, :]
        c = np.where(above, mid, c)
        a = np.where(above, a, mid)
    return 0.5 * (a + c)


def bisect_eigenvalues(diag, off2, ranks, lo, hi, tol):
    """Eigenvalues with ascending 0-based indices ``ranks`` inside brackets ``[lo, hi]``."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off2 = np.ascontiguousarray(off2, dtype=np.float64)
    ranks = np.ascontiguousarray(ranks, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if use_numba():
        return _bisect_nb(diag, off2, ranks, lo, hi, float(tol))
    return _bisect_np(diag, off2, ranks, lo, hi, float(tol))


# -- log-magnitude eigenvectors by twisted factorisation ---------------------

@njit
def _eigvec_log_nb(diag, off, lam):
    B, n = diag.shape
    sign = np.empty((B, n), np.float64)
    logabs = np.empty((B, n), np.float64)
    dplus = np.empty(n, np.float64)
    dminus = np.empty(n, np.float64)
    for b in range(B):
        x = lam[b]
        dplus[0] = diag[b, 0] - x
        if dplus[0] == 0.0:
            dplus[0] = -TINY
        for i in range(1, n):
            dplus[i] = diag[b, i] - x - off[b, i - 1] * off[b, i - 1] / dplus[i - 1]
            if dplus[i] == 0.0:
                dplus[i] = -TINY
        dminus[n - 1] = diag[b, n - 1] - x
        if dminus[n - 1] == 0.0:
            dminus[n - 1] = -TINY
        for i in range(n - 2, -1, -1):
            dminus[i] = diag[b, i] - x - off[b, i] * off[b, i] / dminus[i + 1]
            if dminus[i] == 0.0:
                dminus[i] = -TINY
        twist = 0
        best = math.inf
        for i in range(n):
            g = abs(dplus[i] + dminus[i] - (diag[b, i] - x))
            if g < best:
                best = g
                twist = i
        sign[b, twist] = 1.0
        logabs[b, twist] = 0.0
        for i in range(twist - 1, -1, -1):
            ratio = -off[b, i] / dplus[i]
            sign[b, i] = sign[b, i + 1] * (1.0 if ratio > 0 else -1.0)
            logabs[b, i] = logabs[b, i + 1] + math.log(abs(ratio))
        for i in range(twist + 1, n):
            ratio = -off[b, i - 1] / dminus[i]
            sign[b, i] = sign[b, i - 1] * (1.0 if ratio > 0 else -1.0)
            logabs[b, i] = logabs[b, i - 1] + math.log(abs(ratio))
    return sign, logabs


def _eigvec_log_np(diag, off, lam):
    B, n = diag.shape
    dplus = np.empty((B, n))
    dminus = np.empty((B, n))
    dplus[:, 0] = diag[:, 0] - lam
    dplus[dplus[:, 0] == 0.0, 0] = -TINY
    for i in range(1, n):
        d = diag[:, i] - lam - off[:, i - 1] ** 2 / dplus[:, i - 1]
        d[d == 0.0] = -TINY
        dplus[:, i] = d
    dminus[:, n - 1] = diag[:, n - 1] - lam
    dminus[dminus[:, n - 1] == 0.0, n - 1] = -TINY
    for i in range(n - 2, -1, -1):
        d = diag[:, i] - lam - off[:, i] ** 2 / dminus[:, i + 1]
        d[d == 0.0] = -TINY
        dminus[:, i] = d
    gamma = np.abs(dplus + dminus - (diag - lam[:, None]))
    twist = np.argmin(gamma, axis=1)
    rows = np.arange(B)
    # step ratios phi(i)/phi(i+1) above the twist, phi(i)/phi(i-1) below it
    up = -off / dplus[:, :-1]
    down = -off / dminus[:, 1:]
    sign = np.empty((B, n))
    logabs = np.empty((B, n))
    sign[rows, twist] = 1.0
    logabs[rows, twist] = 0.0
    for i in range(n - 2, -1, -1):
        m = i < twist
        sign[m, i] = sign[m, i + 1] * np.sign(up[m, i])
        logabs[m, i] = logabs[m, i + 1] + np.log(np.abs(up[m, i]))
    for i in range(1, n):
        m = i > twist
        sign[m, i] = sign[m, i - 1] * np.sign(down[m, i - 1])
        logabs[m, i] = logabs[m, i - 1] + np.log(np.abs(down[m, i - 1]))
    return sign, logabs


def eigvec_log(diag, off, lam):
    """Unnormalised eigenvector for eigenvalue ``lam`` as ``(sign, log|phi|)``, twist entry = 1."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if use_numba():
        return _eigvec_log_nb(diag, off, lam)
    return _eigvec_log_np(diag, off, lam)


# -- tridiagonal solve with partial pivoting ---------------------------------

@njit
def tridiag_solve_pivoted(sub, dia, sup, rhs, tiny):
    """Solve a tridiagonal system by LU with partial pivoting.

    Zero pivots of U are replaced by ``tiny`` (inverse iteration relies on
    this to solve with an almost-singular shifted matrix).
    """
    n = dia.shape[0]
    dl = sub.copy()
    d = dia.copy()
    du = sup.copy()
    du2 = np.zeros(max(n - 2, 0))
    swap = np.zeros(max(n - 1, 0), np.bool_)
    b = rhs.copy()
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = tiny
            fact = dl[i] / d[i]
            dl[i] = fact
            d[i + 1] -= fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            swap[i] = True
    if d[n - 1] == 0.0:
        d[n - 1] = tiny
    for i in range(n - 1):
        if not swap[i]:
            b[i + 1] -= dl[i] * b[i]
        else:
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - dl[i] * b[i]
    b[n - 1] /= d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i]
    return b
