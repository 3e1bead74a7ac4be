"""Riccati diffusion of the stochastic Airy operator and its blow-up counts.

The number of blow-ups of ``dp = (x - lam - p^2) dx + (2/sqrt(beta)) dB``
started from ``p(0) = +inf`` equals the number of eigenvalues of the
stochastic Airy operator at most ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _riccati_kernels as K
from ._accel import use_numba
from .errors import DomainError
from .rng import replica_key, replica_keys
from .spectra import riccati_ode_blowup

__all__ = [
    "DiffusionConfig",
    "BlowupRecord",
    "ExperimentReport",
    "auto_horizon",
    "simulate_path",
    "count_below",
    "count_batch",
    "first_blowup_batch",
    "blowup_time_interval",
    "blowup_time_experiment",
    "deviation_event_probability",
]

SCHEMES = ("chart", "capped")


def auto_horizon(lam: float) -> float:
    """``max(2*lam, lam + 10)``: blow-ups beyond this are exponentially unlikely."""
    return max(2.0 * lam, lam + 10.0)


@dataclass(frozen=True)
class DiffusionConfig:
    """Parameters of one diffusion path.

    ``x_max=None`` selects the automatic horizon.  ``switch`` is the level of
    ``|p|`` where the chart scheme moves to ``w = -1/p``; ``p_cap`` is only
    used by the capped scheme.
    """

    beta: float
    lam: float
    h0: float = 1e-3
    p_cap: float = 1e4
    x_max: float | None = None
    scheme: str = "chart"
    switch: float = 8.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not 0 < self.h0 <= 0.01:
            raise DomainError(f"h0 must lie in (0, 0.01], got {self.h0}")
        if not self.p_cap >= 100:
            raise DomainError(f"p_cap must be >= 100, got {self.p_cap}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.switch >= 1:
            raise DomainError("switch must be >= 1")
        if self.x_max is not None and not self.x_max > 0:
            raise DomainError("x_max must be positive")

    @property
    def sigma(self) -> float:
        return 2.0 / math.sqrt(self.beta)

    @property
    def horizon(self) -> float:
        return auto_horizon(self.lam) if self.x_max is None else float(self.x_max)


@dataclass(frozen=True)
class BlowupRecord:
    blowup_times: tuple
    terminal_x: float
    terminal_p: float
    path_seed: tuple

    @property
    def count(self) -> int:
        return len(self.blowup_times)


@dataclass
class ExperimentReport:
    """Monte Carlo summary: named estimates with standard errors."""

    estimates: dict
    stderrs: dict = field(default_factory=dict)
    reps: int = 0
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _capacity(lam, horizon):
    top = max(lam, horizon - lam, 1.0)
    return 16 + 2 * int((2.0 / (3.0 * math.pi)) * (abs(lam) + 10.0) ** 1.5 + top)


def simulate_path(config: DiffusionConfig, seed=0, replica: int = 0, substream: int = 0) -> BlowupRecord:
    """One diffusion path on the stream ``(seed, replica, substream)``."""
    key = replica_key(seed, replica, substream)
    horizon = config.horizon
    cap = _capacity(config.lam, horizon)
    while True:
        times = np.empty(cap)
        if config.scheme == "chart":
            count, x_end, p_end = K.chart_path(float(config.lam), config.sigma, float(config.h0),
                                               float(config.switch), horizon, key, times)
        else:
            count, x_end, p_end, _ = K.capped_path(float(config.lam), config.sigma, float(config.h0),
                                                   float(config.p_cap), horizon, key, times,
                                                   np.int64(2**62))
        if count <= cap:
            break
        cap = 2 * count
    return BlowupRecord(tuple(float(t) for t in times[:count]), float(x_end), float(p_end),
                        (int(seed), int(replica), int(substream)))


def count_below(lam: float, beta: float, seed=0, replica: int = 0, **config) -> int:
    """``N(lam)``: blow-ups of one path with the automatic horizon."""
    return simulate_path(DiffusionConfig(beta=beta, lam=lam, **config), seed, replica).count


def _batch(lams, beta, keys, h0, switch, x_max, first_only):
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    x_max = np.ascontiguousarray(np.broadcast_to(x_max, lams.shape), dtype=np.float64)
    sigma = 2.0 / math.sqrt(beta)
    fn = K.chart_counts_nb if use_numba() else K.chart_counts_np
    return fn(lams, sigma, float(h0), float(switch), x_max, keys, bool(first_only))


def count_batch(lam, beta: float, seed, start: int, stop: int, h0: float = 1e-3,
                switch: float = 8.0, substream: int = 0) -> np.ndarray:
    """Blow-up counts for replicas ``start..stop-1`` (chart scheme, automatic horizon).

    ``lam`` may be a scalar or a sequence; with a sequence, every replica
    is run at every level on shared Brownian increments.  Returns shape
    ``(stop-start,)`` or ``(stop-start, len(lam))``.
    """
    DiffusionConfig(beta=beta, lam=0.0, h0=h0, switch=switch)
    levels = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    keys = replica_keys(seed, start, stop, substream)
    B, L = keys.size, levels.size
    lams = np.tile(levels, B)
    kk = np.repeat(keys, L)
    xm = np.array([auto_horizon(v) for v in lams])
    out = _batch(lams, beta, kk, h0, switch, xm, False).astype(np.int64).reshape(B, L)
    return out[:, 0] if np.ndim(lam) == 0 else out


def first_blowup_batch(a: float, beta: float, seed, start: int, stop: int, h0: float = 1e-3,
                       switch: float = 8.0, x_max: float | None = None, substream: int = 0) -> np.ndarray:
    """First blow-up time of the drift ``x - a - p^2`` for replicas ``start..stop-1`` (``inf`` if none)."""
    DiffusionConfig(beta=beta, lam=a, h0=h0, switch=switch)
    keys = replica_keys(seed, start, stop, substream)
    horizon = auto_horizon(a) if x_max is None else float(x_max)
    return _batch(np.full(keys.size, float(a)), beta, keys, h0, switch, horizon, True)


def blowup_time_interval(a: float, eps: float = 0.25, delta: float = 0.25) -> tuple[float, float]:
    """Two-sided window for the first blow-up time on the small-noise event.

    ``[pi/sqrt((1+eps)(1+delta)a), pi/sqrt((1-eps)((1-delta)a - 2pi/sqrt(a)))]``.
    """
    lo = math.pi / math.sqrt((1 + eps) * (1 + delta) * a)
    hi = math.pi / math.sqrt((1 - eps) * ((1 - delta) * a - 2 * math.pi / math.sqrt(a)))
    return lo, hi


def _mean_se(v):
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        return float(v.mean()), math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def _summary(delta, a, beta, eps, delta_par, M):
    lo, hi = blowup_time_interval(a, eps, delta_par)
    outside = (delta < lo) | (delta > hi)
    mean, se = _mean_se(delta[np.isfinite(delta)])
    frac, frac_se = _mean_se(outside.astype(float))
    est = {
        "mean": mean,
        "q05": float(np.quantile(delta, 0.05)),
        "q50": float(np.quantile(delta, 0.5)),
        "q95": float(np.quantile(delta, 0.95)),
        "frac_outside": frac,
        "outside_bound": min(1.0, 4.0 * math.exp(-beta * delta_par * eps * a ** 1.5 / (32 * math.pi))),
        "interval_lo": lo,
        "interval_hi": hi,
        "ode_value": riccati_ode_blowup(a),
    }
    ses = {"mean": se, "frac_outside": frac_se}
    if M is not None:
        late = delta > 4 * math.pi / math.sqrt(a) + 4 * M / a
        est["frac_late"], ses["frac_late"] = _mean_se(late.astype(float))
        est["late_bound"] = min(1.0, 4.0 * math.exp(-beta * M * a / 64.0))
    return est, ses


def blowup_time_experiment(a: float, beta: float, reps: int, seed=0, h0: float = 1e-3,
                           M: float | None = None, eps: float = 0.25, delta: float = 0.25,
                           start: int = 0) -> ExperimentReport:
    """Distribution of the first blow-up time with drift ``x - a - p^2``.

    Reports the mean and quantiles, the fraction outside the small-noise
    window of :func:`blowup_time_interval` next to its probability bound
    ``4 exp(-beta*delta*eps*a^(3/2)/(32 pi))`` and, if ``M`` is given, the
    fraction later than ``4pi/sqrt(a) + 4M/a`` next to ``4 exp(-beta*M*a/64)``.
    """
    if not a >= 15:
        raise DomainError(f"a = {a}: the blow-up window needs a > (12 pi)^(2/3), use a >= 15")
    if M is not None and not math.pi * math.sqrt(a) <= M <= a * a / 100:
        raise DomainError("M must lie in [pi*sqrt(a), a^2/100]")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    d = first_blowup_batch(a, beta, seed, start, start + reps, h0=h0)
    est, ses = _summary(d, a, beta, eps, delta, M)
    cfg = {"a": a, "beta": beta, "reps": reps, "seed": seed, "h0": h0, "M": M}
    return ExperimentReport(est, ses, reps, cfg)


def deviation_event_probability(R: float, k: int, eta: float | Sequence[float], beta: float, reps: int,
                                seed=0, h0: float = 1e-3, start: int = 0) -> ExperimentReport:
    """Frequency of ``{N(R k^(2/3)) >= eta R^(3/2) k}`` for one or several ``eta``.

    All thresholds are evaluated on the same paths, so frequencies for
    increasing ``eta`` are nested.
    """
    etas = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    if not R >= 1:
        raise DomainError("R must be >= 1")
    if not k >= 1:
        raise DomainError("k must be >= 1")
    if np.any(etas < 15):
        raise DomainError("eta must be >= 15")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    lam = R * k ** (2.0 / 3.0)
    counts = count_batch(lam, beta, seed, start, start + reps, h0=h0)
    est, ses = {}, {}
    for e in etas:
        name = f"freq_eta={e:g}"
        est[name], ses[name] = _mean_se(counts >= e * R ** 1.5 * k)
    est["mean_count"], ses["mean_count"] = _mean_se(counts)
    cfg = {"R": R, "k": k, "eta": etas.tolist(), "beta": beta, "reps": reps, "seed": seed, "h0": h0}
    return ExperimentReport(est, ses, reps, cfg)
