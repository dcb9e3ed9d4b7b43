"""Train and evaluate the undefended victim classifier that attacks target."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .data import LabeledDataset
from .errors import InvalidInputError
from .nn import AdamConfig, Model


@dataclass
class VictimTrainConfig:
    epochs: int = 5
    adam: AdamConfig = field(default_factory=lambda: AdamConfig(alpha=1e-3, batch_size=128))
    seed: int = 0


@dataclass
class EpochLog:
    epoch: int
    step: int
    loss: float
    val_accuracy: float


def train_victim(
    train: LabeledDataset,
    config: VictimTrainConfig,
    eval_data: LabeledDataset | None = None,
) -> tuple[Model, list[EpochLog]]:
    """Train the small victim CNN from scratch; returns (checkpoint, log).

    The log holds one row per epoch (mean train loss, accuracy on
    ``eval_data`` if given, else on the training set).
    """
    if len(train) == 0:
        raise InvalidInputError("training set is empty")
    h, w, c = train.images.shape[1:]
    spec = nn.victim_spec((h, w, c), classes=10)
    model = nn.init_model(spec, seed=config.seed)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    log: list[EpochLog] = []
    step = 0
    bs = config.adam.batch_size
    for epoch in range(config.epochs):
        order = rng.permutation(len(train))
        losses = []
        for start in range(0, len(train), bs):
            idx = order[start : start + bs]
            loss, grads = nn.loss_and_param_gradients(model, train.images[idx], train.labels[idx])
            nn.adam_step(model, grads, config.adam)
            losses.append(loss)
            step += 1
        probe = eval_data if eval_data is not None else train
        acc, _, _ = evaluate_victim(model, probe)
        log.append(EpochLog(epoch, step, float(np.mean(losses)), acc))
    return model, log


def predict_labels(model: Model, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Argmax predictions, computed in batches."""
    preds = np.empty(len(images), dtype=np.int64)
    for start in range(0, len(images), batch_size):
        logits = nn.forward(model, images[start : start + batch_size])
        preds[start : start + batch_size] = logits.argmax(axis=1)
    return preds


def evaluate_victim(model: Model, data: LabeledDataset):
    """(accuracy, per-class accuracy, predictions) on a labeled dataset."""
    if data.images.shape[1:] != tuple(model.spec.input_shape):
        raise InvalidInputError(
            f"dataset shape {data.images.shape[1:]} does not match model input "
            f"{tuple(model.spec.input_shape)}"
        )
    preds = predict_labels(model, data.images)
    correct = preds == data.labels
    accuracy = float(correct.mean()) if len(data) else 0.0
    per_class = np.zeros(model.spec.classes)
    for cls in range(model.spec.classes):
        mask = data.labels == cls
        per_class[cls] = float(correct[mask].mean()) if mask.any() else 0.0
    return accuracy, per_class, preds


def write_training_log(log: list[EpochLog], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "step", "loss", "val_accuracy"])
        for row in log:
            writer.writerow([row.epoch, row.step, f"{row.loss:.6f}", f"{row.val_accuracy:.6f}"])
