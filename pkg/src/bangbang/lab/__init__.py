"""Experiment harness: configs, runner, fits, reports and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .fitting import FitResult, fit_scaling, fit_xy
from .report import table1_report
from .runner import ResultRow, run

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "FitResult",
    "ResultRow",
    "fit_scaling",
    "fit_xy",
    "load_config",
    "parse_config",
    "run",
    "table1_report",
]
