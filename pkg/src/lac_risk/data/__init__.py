"""Datasets, CSV ingestion and scenario construction."""
from .base import CsvSource, DirectorySource, ScenarioSource, SyntheticSource
from .csv_ingest import load_csv, read_table
from .scenario import apply_prior_shift, make_scenario, make_synthetic_gaussians, split_priors
from .scenario_io import load_scenario, save_scenario

__all__ = [
    "CsvSource",
    "DirectorySource",
    "ScenarioSource",
    "SyntheticSource",
    "load_csv",
    "read_table",
    "apply_prior_shift",
    "make_scenario",
    "make_synthetic_gaussians",
    "split_priors",
    "load_scenario",
    "save_scenario",
]
