"""Training, evaluation metrics, redundancy diagnostics and experiment harnesses."""

from .experiments import (
    DEFAULT_VARIANTS,
    AblationReport,
    DatasetSelection,
    RecoveryResult,
    dataset_band_selection,
    planted_recovery,
    redundancy_comparison,
    run_ablation,
)
from .metrics import EvalReport, confusion_matrix, evaluate, predict, report_from_confusion
from .optim import SGD, Adam
from .pipeline import PreparedData, band_features, prepare_data, prepare_scene
from .redundancy import RedundancyReport, redundancy_acc, redundancy_mi, redundancy_report
from .trainer import TrainConfig, TrainResult, train, write_loss_csv

__all__ = [
    "DEFAULT_VARIANTS",
    "AblationReport",
    "Adam",
    "DatasetSelection",
    "EvalReport",
    "PreparedData",
    "RecoveryResult",
    "RedundancyReport",
    "SGD",
    "TrainConfig",
    "TrainResult",
    "band_features",
    "confusion_matrix",
    "dataset_band_selection",
    "evaluate",
    "planted_recovery",
    "predict",
    "prepare_data",
    "prepare_scene",
    "redundancy_acc",
    "redundancy_comparison",
    "redundancy_mi",
    "redundancy_report",
    "report_from_confusion",
    "run_ablation",
    "train",
    "write_loss_csv",
]
