"""Mini-batch training, k-fold cross-validation and fold reports."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import TrainingError, ValidationError
from .model import LOSS_KINDS, CnnModel, backward, forward, loss
from .optim import AdamConfig, AdamState, adam_step


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    loss: str = "MSE"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    folds: int = 5
    train_fraction: float = 0.8
    shuffle_seed: int = 0
    init_seed: int = 0
    contiguous_folds: bool = False
    bias_init: str = "target_mean"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.loss.upper() not in LOSS_KINDS:
            raise ValidationError(f"loss must be one of {LOSS_KINDS}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie in (0, 1)")
        if self.bias_init not in ("zero", "target_mean"):
            raise ValidationError("bias_init must be 'zero' or 'target_mean'")
        if self.folds < 2:
            raise ValidationError("folds must be >= 2")
        if not (self.lr > 0 and self.eps > 0 and 0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValidationError("Adam needs lr > 0, eps > 0 and betas in [0, 1)")
        # k-fold fixes the split; a contradicting fraction would be silently ignored
        if abs(self.train_fraction - (self.folds - 1) / self.folds) > 1e-9:
            raise ValidationError(
                f"train_fraction {self.train_fraction} contradicts {self.folds} folds "
                f"(each fold trains on {(self.folds - 1) / self.folds:.4g})")

    @property
    def adam(self) -> AdamConfig:
        return AdamConfig(self.lr, self.beta1, self.beta2, self.eps)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float | None = None
    val_mae: float | None = None
    val_mse: float | None = None


@dataclass
class FoldReport:
    fold: int
    loss: str
    n_train: int
    n_val: int
    epochs: list[EpochRecord] = field(default_factory=list)
    final_mae: float | None = None
    final_mse: float | None = None

    @property
    def train_losses(self) -> list[float]:
        return [e.train_loss for e in self.epochs]

    @property
    def val_losses(self) -> list[float | None]:
        return [e.val_loss for e in self.epochs]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CrossValidationResult:
    reports: list[FoldReport]
    models: list[CnnModel]
    states: list[AdamState]
    folds: list[np.ndarray]
    mae: float
    mse: float


def prepare_inputs(matrices, kind: str) -> np.ndarray:
    """Stack fields into a (N, 1, n, n) float64 batch scaled into [0, 1].

    Fields that can be negative are mapped with ``(v + 1) / 2``; a QGASF
    dataset is used as is unless it actually contains negative values.
    """
    x = np.asarray(matrices, dtype=np.float64)
    if x.ndim == 3:
        x = x[:, None, :, :]
    if x.ndim != 4 or x.shape[1] != 1:
        raise ValidationError(f"expected (N, n, n) fields, got shape {x.shape}")
    if kind.upper() == "QGASF" and x.min() >= 0.0:
        return np.ascontiguousarray(x)
    return np.ascontiguousarray((x + 1.0) / 2.0)


def predict(model: CnnModel, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
    out = [forward(model, x[k:k + batch_size]).ravel() for k in range(0, len(x), batch_size)]
    return np.concatenate(out)


def evaluate(model: CnnModel, x: np.ndarray, y: np.ndarray) -> dict[str, float]:
    pred = predict(model, x)
    r = pred - np.asarray(y, dtype=np.float64)
    return {"mae": float(np.mean(np.abs(r))), "mse": float(np.mean(r * r))}


def train(x: np.ndarray, y: np.ndarray, cfg: TrainConfig = TrainConfig(),
          x_val: np.ndarray | None = None, y_val: np.ndarray | None = None,
          fold: int = 0, rng: np.random.Generator | None = None,
          ) -> tuple[CnnModel, AdamState, FoldReport]:
    """Train a freshly initialized model with Adam.

    ``train_loss`` per epoch is the sample-weighted mean of the mini-batch
    losses seen during that epoch.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = len(x)
    if n < 2:
        raise ValidationError(f"need at least 2 training samples, got {n}")
    if len(y) != n:
        raise ValidationError("x and y lengths differ")
    kind = cfg.loss.upper()
    model = CnnModel.initialize(cfg.init_seed, input_size=x.shape[-1])
    if cfg.bias_init == "target_mean":
        model.params["fc2.bias"][:] = y.mean()
    state = AdamState.for_model(model)
    if rng is None:
        rng = np.random.default_rng([cfg.shuffle_seed, 1, fold])
    report = FoldReport(fold, kind, n, 0 if x_val is None else len(x_val))
    adam = cfg.adam
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = np.sort(order[start:start + cfg.batch_size])
            value, grads = backward(model, x[idx], y[idx], kind)
            if not math.isfinite(value):
                raise TrainingError(f"fold {fold}: non-finite loss at epoch {epoch}, batch {b}")
            try:
                adam_step(model, grads, state, adam)
            except TrainingError as exc:
                raise TrainingError(f"fold {fold}, epoch {epoch}, batch {b}: {exc}") from exc
            total += value * len(idx)
        rec = EpochRecord(epoch, total / n)
        if x_val is not None and len(x_val):
            metrics = evaluate(model, x_val, y_val)
            rec.val_mae, rec.val_mse = metrics["mae"], metrics["mse"]
            rec.val_loss = metrics["mse"] if kind == "MSE" else metrics["mae"]
        report.epochs.append(rec)
    if x_val is not None and len(x_val):
        report.final_mae = report.epochs[-1].val_mae
        report.final_mse = report.epochs[-1].val_mse
    return model, state, report


def fold_indices(n: int, cfg: TrainConfig = TrainConfig()) -> list[np.ndarray]:
    """Partition ``range(n)`` into ``cfg.folds`` validation folds.

    The order is shuffled once with ``shuffle_seed`` unless ``contiguous_folds``.
    Fold sizes differ by at most one when ``n`` is not divisible.
    """
    if n < cfg.folds:
        raise ValidationError(f"dataset of {n} samples is smaller than {cfg.folds} folds")
    order = np.arange(n) if cfg.contiguous_folds else np.random.default_rng([cfg.shuffle_seed, 0]).permutation(n)
    return [np.sort(f) for f in np.array_split(order, cfg.folds)]


def cross_validate(x: np.ndarray, y: np.ndarray, cfg: TrainConfig = TrainConfig(),
                   progress=None) -> CrossValidationResult:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    folds = fold_indices(len(x), cfg)
    reports, models, states = [], [], []
    for k, val_idx in enumerate(folds):
        mask = np.ones(len(x), dtype=bool)
        mask[val_idx] = False
        model, state, report = train(x[mask], y[mask], cfg, x[val_idx], y[val_idx], fold=k)
        reports.append(report)
        models.append(model)
        states.append(state)
        if progress is not None:
            progress(k, report)
    mae = float(np.mean([r.final_mae for r in reports]))
    mse = float(np.mean([r.final_mse for r in reports]))
    return CrossValidationResult(reports, models, states, folds, mae, mse)


def write_fold_csv(report: FoldReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss"])
        for e in report.epochs:
            w.writerow([e.epoch, repr(e.train_loss), "" if e.val_loss is None else repr(e.val_loss)])


def read_fold_csv(path) -> list[tuple[int, float, float | None]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["epoch"]), float(r["train_loss"]),
             float(r["val_loss"]) if r["val_loss"] else None) for r in rows]


__all__ = [
    "TrainConfig", "EpochRecord", "FoldReport", "CrossValidationResult",
    "prepare_inputs", "predict", "evaluate", "train", "fold_indices",
    "cross_validate", "write_fold_csv", "read_fold_csv", "loss",
]
