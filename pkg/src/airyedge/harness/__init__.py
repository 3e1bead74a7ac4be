"""Monte Carlo engine, experiments and command-line interface."""

from .engine import ExperimentConfig, ExperimentReport, run
from .cli import main

__all__ = ["ExperimentConfig", "ExperimentReport", "run", "main"]
