"""Scenario definition, offline training, experiment runs, analytics and the CLI."""

from .analysis import SUMMARY_KPIS, EmptySelection, analyze, ecdf, mean, median, summarize
from .datasets import (
    LiveSimEnv,
    ReplayEnv,
    Segment,
    control_grid,
    generate_dataset,
    group_windows,
    write_dataset,
)
from .experiment import ExperimentResult, run_experiment
from .scenario import ScenarioConfig, ScenarioError
from .sweep import SweepSpec, sweep
from .training import TrainingDiverged, TrainResult, ensure_encoder, store_intent, train

__all__ = [
    "SUMMARY_KPIS", "EmptySelection", "analyze", "ecdf", "mean", "median", "summarize",
    "LiveSimEnv", "ReplayEnv", "Segment", "control_grid", "generate_dataset", "group_windows",
    "write_dataset", "ExperimentResult", "run_experiment", "ScenarioConfig", "ScenarioError",
    "SweepSpec", "sweep", "TrainingDiverged", "TrainResult", "ensure_encoder", "store_intent", "train",
]
