"""Experiment configuration and runners."""
from .config import METHODS, ExperimentConfig, apply_settings, load_config, parse_config_text
from .runner import (
    DEFAULT_SWEEP_VALUES,
    METRICS,
    RESULTS_FILE,
    SUMMARY_FILE,
    SWEEP_AXES,
    MethodPlan,
    RunOutcome,
    SummaryRow,
    make_source,
    parse_sweep_values,
    read_results,
    resolve_method,
    run_experiment,
    run_seed,
    run_sweep,
    summarize,
    with_axis_value,
    write_summary_csv,
)

__all__ = [
    "METHODS",
    "ExperimentConfig",
    "apply_settings",
    "load_config",
    "parse_config_text",
    "DEFAULT_SWEEP_VALUES",
    "METRICS",
    "RESULTS_FILE",
    "SUMMARY_FILE",
    "SWEEP_AXES",
    "MethodPlan",
    "RunOutcome",
    "SummaryRow",
    "make_source",
    "parse_sweep_values",
    "read_results",
    "resolve_method",
    "run_experiment",
    "run_seed",
    "run_sweep",
    "summarize",
    "with_axis_value",
    "write_summary_csv",
]
