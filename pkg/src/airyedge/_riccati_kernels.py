"""Euler-Maruyama kernels for ``dp = (x - lam - p^2) dx + sigma dB`` from ``p(0) = +inf``.

Two schemes:

``chart``
    Uniform grid ``x_j = j*h``.  While ``|p| <= switch`` the state is ``p``;
    beyond it the state is ``w = -1/p``, which obeys the regular Ito SDE
    ``dw = (-1 + (x - lam) w^2 + sigma^2 w^3) dx + sigma w^2 dB``.  A blow-up
    is ``w`` crossing from ``> 0`` (``p`` near ``-inf``) to ``<= 0``; its time
    is located by linear interpolation inside the step.  The normal used on
    step ``j`` is number ``j`` of the path's counter stream, so paths at
    different ``lam`` with the same key share their Brownian increments.

``capped``
    ``p`` itself with the adaptive step ``min(h, 100 h / (1 + p^2))``,
    started at ``+p_cap`` after the entry time ``1/p_cap``; when
    ``p <= -p_cap`` a blow-up is recorded ``1/p_cap`` later and the path
    restarts at ``+p_cap`` another ``1/p_cap`` later.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit
from .rng import counter_normal, counter_normal_scalar


@njit
def _chart_step(chart, y, x, h, lam, sigma, dB):
    if chart == 0:
        return y + (x - lam - y * y) * h + sigma * dB
    w2 = y * y
    return y + (-1.0 + (x - lam) * w2 + sigma * sigma * w2 * y) * h + sigma * w2 * dB


@njit
def chart_path(lam, sigma, h, switch, x_max, key, times):
    """Fill ``times`` with blow-up times; returns ``(count, x_end, p_end)``.

    ``count`` may exceed ``times.size``; the caller then retries with a
    larger buffer.
    """
    steps = int(math.ceil(x_max / h - 1e-9))
    sq = math.sqrt(h)
    chart = 1
    y = 0.0
    count = 0
    for j in range(steps):
        x = j * h
        dB = sq * counter_normal_scalar(key, j)
        y_new = _chart_step(chart, y, x, h, lam, sigma, dB)
        if chart == 1 and y > 0.0 and y_new <= 0.0:
            if count < times.shape[0]:
                times[count] = x + h * y / (y - y_new)
            count += 1
        y = y_new
        if chart == 0 and abs(y) > switch:
            chart = 1
            y = -1.0 / y
        elif chart == 1 and y != 0.0 and abs(y) > 1.0 / switch:
            chart = 0
            y = -1.0 / y
    if chart == 0:
        p_end = y
    elif y == 0.0:
        p_end = math.inf
    else:
        p_end = -1.0 / y
    return count, steps * h, p_end


@njit
def chart_counts_nb(lams, sigma, h, switch, x_max, keys, first_only):
    """Blow-up counts (or first blow-up times if ``first_only``) for many paths."""
    B = keys.shape[0]
    out = np.empty(B, np.float64)
    sq = math.sqrt(h)
    for b in range(B):
        steps = int(math.ceil(x_max[b] / h - 1e-9))
        lam = lams[b]
        key = keys[b]
        chart = 1
        y = 0.0
        count = 0
        first = math.inf
        for j in range(steps):
            x = j * h
            dB = sq * counter_normal_scalar(key, j)
            y_new = _chart_step(chart, y, x, h, lam, sigma, dB)
            if chart == 1 and y > 0.0 and y_new <= 0.0:
                count += 1
                if first_only:
                    first = x + h * y / (y - y_new)
                    break
            y = y_new
            if chart == 0 and abs(y) > switch:
                chart = 1
                y = -1.0 / y
            elif chart == 1 and y != 0.0 and abs(y) > 1.0 / switch:
                chart = 0
                y = -1.0 / y
        out[b] = first if first_only else count
    return out


def chart_counts_np(lams, sigma, h, switch, x_max, keys, first_only):
    """Vectorised over paths; same arithmetic as :func:`chart_counts_nb`."""
    B = keys.shape[0]
    steps_each = np.ceil(x_max / h - 1e-9).astype(np.int64)
    chart = np.ones(B, np.int64)
    y = np.zeros(B)
    count = np.zeros(B)
    first = np.full(B, np.inf)
    alive = steps_each > 0
    sq = math.sqrt(h)
    for j in range(int(steps_each.max(initial=0))):
        alive &= j < steps_each
        if not alive.any():
            break
        x = j * h
        dB = sq * counter_normal(keys, j)
        w2 = y * y
        y_p = y + (x - lams - w2) * h + sigma * dB
        y_w = y + (-1.0 + (x - lams) * w2 + sigma * sigma * w2 * y) * h + sigma * w2 * dB
        y_new = np.where(chart == 0, y_p, y_w)
        hit = alive & (chart == 1) & (y > 0.0) & (y_new <= 0.0)
        if hit.any():
            count[hit] += 1.0
            if first_only:
                first[hit] = x + h * y[hit] / (y[hit] - y_new[hit])
                alive &= ~hit
        y = np.where(alive, y_new, y)
        to_w = alive & (chart == 0) & (np.abs(y) > switch)
        to_p = alive & (chart == 1) & (y != 0.0) & (np.abs(y) > 1.0 / switch)
        flip = to_w | to_p
        if flip.any():
            y[flip] = -1.0 / y[flip]
            chart[to_w] = 1
            chart[to_p] = 0
    return first if first_only else count


@njit
def capped_path(lam, sigma, h0, p_cap, x_max, key, times, max_steps):
    """Literal pole-capped scheme; returns ``(count, x_end, p_end, steps_used)``."""
    x = 1.0 / p_cap
    p = p_cap
    count = 0
    j = 0
    while x < x_max and j < max_steps:
        h = min(h0, 100.0 * h0 / (1.0 + p * p), x_max - x)
        p = p + (x - lam - p * p) * h + sigma * math.sqrt(h) * counter_normal_scalar(key, j)
        x += h
        j += 1
        if p <= -p_cap:
            if count < times.shape[0]:
                times[count] = x + 1.0 / p_cap
            count += 1
            x += 2.0 / p_cap
            p = p_cap
    return count, x, p, j
