"""From-scratch convolutional regressor for angular-field images."""

from .checkpoint import load_checkpoint, save_checkpoint
from .kernels import BACKEND
from .model import CnnModel, architecture_hash, backward, forward, loss, spatial_flow
from .optim import AdamConfig, AdamState, adam_step
from .training import (
    CrossValidationResult,
    FoldReport,
    TrainConfig,
    cross_validate,
    evaluate,
    fold_indices,
    predict,
    prepare_inputs,
    train,
    write_fold_csv,
)

__all__ = [
    "BACKEND", "CnnModel", "architecture_hash", "backward", "forward", "loss",
    "spatial_flow", "AdamConfig", "AdamState", "adam_step", "CrossValidationResult",
    "FoldReport", "TrainConfig", "cross_validate", "evaluate", "fold_indices",
    "predict", "prepare_inputs", "train", "write_fold_csv", "save_checkpoint",
    "load_checkpoint",
]
