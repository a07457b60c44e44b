"""Experiment plumbing: designs, solver datasets, surrogate transitions and runs."""

from .data import DATASET_COLUMNS, DataTable, evaluate_points, read_csv, snap_k, write_csv
from .design import SampleBox, lhs_sample, strata_counts
from .experiments import (PRESETS, ExperimentConfig, ExperimentError, apply_overrides, code_version,
                          generate_dataset, run_experiment)
from .transitions import (TransitionResult, as_energy_fn, bandwidth_check, surrogate_dispersion,
                          surrogate_transition_curve)

__all__ = [
    "DATASET_COLUMNS", "DataTable", "evaluate_points", "read_csv", "snap_k", "write_csv",
    "SampleBox", "lhs_sample", "strata_counts",
    "PRESETS", "ExperimentConfig", "ExperimentError", "apply_overrides", "code_version",
    "generate_dataset", "run_experiment",
    "TransitionResult", "as_energy_fn", "bandwidth_check", "surrogate_dispersion", "surrogate_transition_curve",
]
