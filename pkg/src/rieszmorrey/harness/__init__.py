"""Config-driven experiments, boundedness reports and the command-line interface."""

from .config import SCHEMA, ExperimentConfig, from_tree, load, preset_names
from .report import REPORT_SCHEMA, BoundednessReport, Row, emit_report, render
from .runner import (
    run_adams,
    run_conditions,
    run_experiment,
    run_hardy,
    run_lemma_local,
    run_spanne,
    run_spanne_weak,
)

__all__ = [
    "REPORT_SCHEMA",
    "SCHEMA",
    "BoundednessReport",
    "ExperimentConfig",
    "Row",
    "emit_report",
    "from_tree",
    "load",
    "preset_names",
    "render",
    "run_adams",
    "run_conditions",
    "run_experiment",
    "run_hardy",
    "run_lemma_local",
    "run_spanne",
    "run_spanne_weak",
]
