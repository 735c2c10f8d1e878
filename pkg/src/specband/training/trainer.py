"""Seeded mini-batch training with softmax cross-entropy."""

import csv
import time
from pathlib import Path
from typing import List, Literal, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, Field, model_validator

from ..dataio.models import PatchSet
from ..errors import ConfigurationError, DivergedLoss, InsufficientSamples, NonFiniteError
from ..nn.rscnet import RSCNet
from ..tensor import cross_entropy
from .optim import SGD, Adam, Optimizer

logger = structlog.get_logger(__name__)

DEFAULT_EPOCHS = 20
DEFAULT_BATCH_SIZE = 8
DEFAULT_LEARNING_RATE = 5e-3


class TrainConfig(BaseModel):
    """Optimization recipe; learning_rate 0 is a valid frozen run."""

    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    learning_rate: float = DEFAULT_LEARNING_RATE
    optimizer: Literal["adam", "sgd"] = "adam"
    momentum: float = Field(0.0, ge=0.0, lt=1.0)
    # Adam moment decay rates
    betas: Tuple[float, float] = (0.9, 0.999)
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _check_ranges(cls, data):
        if not isinstance(data, dict):
            return data
        if int(data.get("epochs", DEFAULT_EPOCHS)) < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {data.get('epochs')}")
        if int(data.get("batch_size", DEFAULT_BATCH_SIZE)) < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {data.get('batch_size')}")
        lr = float(data.get("learning_rate", DEFAULT_LEARNING_RATE))
        if not np.isfinite(lr) or lr < 0:
            raise ConfigurationError(f"learning_rate must be a finite value >= 0, got {lr}")
        betas = data.get("betas", (0.9, 0.999))
        if len(betas) != 2 or not all(0.0 <= float(b) < 1.0 for b in betas):
            raise ConfigurationError(f"betas must be two values in [0, 1), got {betas}")
        return data


class TrainResult(BaseModel):
    loss_curve: List[float]
    steps: int
    seconds: float


def make_optimizer(model: RSCNet, config: TrainConfig) -> Optimizer:
    if config.optimizer == "sgd":
        return SGD(model.parameters(), lr=config.learning_rate, momentum=config.momentum)
    beta1, beta2 = config.betas
    return Adam(model.parameters(), lr=config.learning_rate, beta1=beta1, beta2=beta2)


def batch_loss(model: RSCNet, patches: PatchSet, index: np.ndarray):
    """Mean cross-entropy of one batch, built as a single graph."""
    logits = model.forward_batch(
        patches.hsi[index],
        None if patches.reduced is None else patches.reduced[index],
        patches.aux[index],
    )
    return cross_entropy(logits, patches.labels[index] - 1)


def train(model: RSCNet, patches: PatchSet, config: TrainConfig) -> TrainResult:
    """Train in place; returns the per-epoch mean loss curve.

    Raises:
        DivergedLoss: a forward or backward pass produced NaN/Inf
    """
    n = len(patches)
    if n == 0:
        raise InsufficientSamples("training set is empty")
    if model.config.num_classes < 2:
        raise ConfigurationError("training needs at least 2 classes")

    rng = np.random.default_rng(config.seed)
    optimizer = make_optimizer(model, config)
    curve: List[float] = []
    step = 0
    started = time.perf_counter()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            index = order[start:start + config.batch_size]
            optimizer.zero_grad()
            try:
                loss = batch_loss(model, patches, index)
                loss.backward()
                for p in optimizer.params:
                    if p.grad is not None and not np.isfinite(p.grad).all():
                        raise NonFiniteError("non-finite gradient")
            except NonFiniteError as e:
                logger.error("Training diverged", epoch=epoch, step=step, error=str(e))
                raise DivergedLoss(
                    f"loss diverged at epoch {epoch}, step {step}: {e}",
                    epoch=epoch,
                    step=step,
                    state=model.state_dict(),
                ) from e
            optimizer.step()
            step += 1
            total += loss.item() * len(index)

        mean_loss = total / n
        curve.append(mean_loss)
        logger.info("Training epoch finished", epoch=epoch, mean_loss=round(mean_loss, 6), steps=step)

    seconds = time.perf_counter() - started
    return TrainResult(loss_curve=curve, steps=step, seconds=seconds)


def write_loss_csv(curve: List[float], path: Union[str, Path]) -> None:
    """`epoch,mean_loss` rows, epochs numbered from 1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["epoch", "mean_loss"])
        for epoch, value in enumerate(curve, start=1):
            writer.writerow([epoch, repr(float(value))])
