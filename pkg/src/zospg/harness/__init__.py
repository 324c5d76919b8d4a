"""Experiment configs, runner, plots and the self-check suite."""

from .config import ExperimentConfig, MethodSpec, bundled_config, load_config, parse_config
from .experiment import AggregateCurve, BoundCurve, ExperimentResult, aggregate, run_experiment
from .plotting import emit_plot
from .verify import Report, verify_suite

__all__ = [
    "AggregateCurve",
    "BoundCurve",
    "ExperimentConfig",
    "ExperimentResult",
    "MethodSpec",
    "Report",
    "aggregate",
    "bundled_config",
    "emit_plot",
    "load_config",
    "parse_config",
    "run_experiment",
    "verify_suite",
]
