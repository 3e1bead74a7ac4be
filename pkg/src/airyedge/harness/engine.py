"""Replica scheduling and order-independent aggregation.

Replicas ``0..reps-1`` are cut into fixed chunks whose boundaries depend
only on ``reps`` and the experiment's chunk size, never on the worker
count.  Chunks run on a thread pool (the numba kernels release the GIL),
results are concatenated in replica order and summarised once, so the
numerical payload is identical for any number of workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from .io import SCHEMA, dumps

EXECUTION_KEYS = ("workers", "out", "format", "config")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    reps: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("reps must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def echo(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, "reps": self.reps, "workers": self.workers}
        out.update(self.params)
        return out


@dataclass
class ExperimentReport:
    """Estimates with standard errors (``sample std / sqrt(reps)``) plus tables."""

    experiment: str
    estimates: dict
    stderrs: dict
    reps: int
    config: dict
    tables: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    main: str = "estimates"

    def main_table(self) -> dict:
        if self.main in self.tables:
            return self.tables[self.main]
        return {"columns": ["name", "estimate", "stderr"],
                "rows": [[k, v, self.stderrs.get(k, math.nan)] for k, v in self.estimates.items()]}

    def to_dict(self, tables: bool = True) -> dict:
        d = {"schema": SCHEMA, "experiment": self.experiment, "config": self.config,
             "reps": self.reps, "estimates": self.estimates, "stderrs": self.stderrs,
             "wall_time_s": self.wall_time_s}
        if tables:
            d["tables"] = self.tables
        return d

    def payload(self) -> str:
        """Everything that must not depend on how the run was executed."""
        d = self.to_dict()
        d.pop("wall_time_s")
        d["config"] = {k: v for k, v in d["config"].items() if k not in EXECUTION_KEYS}
        return dumps(d)


def mean_stderr(values) -> tuple[float, float]:
    """Mean by exactly rounded summation and ``std/sqrt(n)``; stderr is NaN for one value."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    n = v.size
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(v) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def chunk_bounds(reps: int, size: int):
    return [(s, min(s + size, reps)) for s in range(0, reps, size)]


def run_replicas(fn, reps: int, workers: int, chunk: int):
    """Apply ``fn(start, stop) -> dict of arrays`` over fixed chunks; concatenate in order."""
    bounds = chunk_bounds(reps, chunk)
    if workers == 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    keys = parts[0].keys()
    return {k: np.concatenate([np.asarray(p[k]) for p in parts], axis=0) for k in keys}


def run(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch ``config.experiment`` to its registered implementation."""
    from .experiments import REGISTRY

    if config.experiment not in REGISTRY:
        raise DomainError(f"unknown experiment {config.experiment!r}")
    exp = REGISTRY[config.experiment]
    params = exp.resolve(config.params)
    t0 = time.perf_counter()
    if exp.replicated_for(params):
        data = run_replicas(lambda a, b: exp.chunk(params, config.seed, a, b),
                            config.reps, config.workers, exp.chunk_size(params))
        estimates, stderrs, tables = exp.summarize(params, data, config)
    else:
        estimates, stderrs, tables = exp.evaluate(params, config)
    echo = config.echo()
    echo.update(params)
    return ExperimentReport(config.experiment, estimates, stderrs, config.reps, echo, tables,
                            time.perf_counter() - t0, exp.main_table)
