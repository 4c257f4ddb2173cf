"""Experiment orchestration: augmentation, codec selection, runners, reports."""

from .augment import (
    apply_baseline_augmentation,
    generate_augmented_set,
    select_codec_subset,
    spec_file_tag,
)
from .experiments import (
    TrainingCondition,
    load_experiment_config,
    pretranscode_eval,
    run_experiment_a,
    run_experiment_a_multiseed,
    run_experiment_b,
)
from .report import (
    ExperimentReport,
    render_report,
    report_from_json,
    report_to_json,
    summarize_report,
    write_report,
)

__all__ = [
    "ExperimentReport",
    "TrainingCondition",
    "apply_baseline_augmentation",
    "generate_augmented_set",
    "load_experiment_config",
    "pretranscode_eval",
    "render_report",
    "report_from_json",
    "report_to_json",
    "run_experiment_a",
    "run_experiment_a_multiseed",
    "run_experiment_b",
    "select_codec_subset",
    "spec_file_tag",
    "summarize_report",
    "write_report",
]
