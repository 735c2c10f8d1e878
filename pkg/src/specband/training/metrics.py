"""Classification metrics (OA, AA, Kappa) and batch inference."""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
import structlog
from pydantic import BaseModel

from ..dataio.models import PatchSet
from ..errors import EmptyTestSet, ShapeMismatch
from ..nn.rscnet import RSCNet
from ..tensor import no_grad

logger = structlog.get_logger(__name__)


class EvalReport(BaseModel):
    """Confusion rows are truth, columns are predictions; classes are 1..C in order."""

    confusion: List[List[int]]
    oa: float
    aa: float
    kappa: float
    per_class: List[Optional[float]]
    samples: int
    missing_classes: List[int] = []
    missing_class_warning: bool = False


def confusion_matrix(truth: np.ndarray, predicted: np.ndarray, num_classes: int) -> np.ndarray:
    """C×C counts for 1-based class ids."""
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise ShapeMismatch(f"{truth.shape[0]} labels vs {predicted.shape[0]} predictions")
    for name, ids in (("truth", truth), ("prediction", predicted)):
        if ids.size and (ids.min() < 1 or ids.max() > num_classes):
            raise ShapeMismatch(f"{name} class id outside [1, {num_classes}]")
    flat = (truth - 1) * num_classes + (predicted - 1)
    return np.bincount(flat, minlength=num_classes * num_classes).reshape(num_classes, num_classes)


def report_from_confusion(confusion: np.ndarray) -> EvalReport:
    """OA = trace/total, AA = mean recall over present classes, Kappa = (p_o - p_e)/(1 - p_e)."""
    confusion = np.asarray(confusion, dtype=np.int64)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise ShapeMismatch(f"confusion must be square, got {confusion.shape}")
    total = int(confusion.sum())
    if total == 0:
        raise EmptyTestSet("cannot evaluate an empty test set")

    correct = int(np.trace(confusion))
    rows = confusion.sum(axis=1)
    cols = confusion.sum(axis=0)
    present = rows > 0
    per_class: List[Optional[float]] = [
        float(confusion[i, i] / rows[i]) if present[i] else None for i in range(len(rows))
    ]
    missing = [i + 1 for i in range(len(rows)) if not present[i]]
    if missing:
        logger.warning("Classes absent from the test set", classes=missing)

    oa = correct / total
    aa = float(np.mean([v for v in per_class if v is not None]))
    p_o = oa
    p_e = float((rows * cols).sum()) / (total * total)
    kappa = 0.0 if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)

    return EvalReport(
        confusion=confusion.tolist(),
        oa=oa,
        aa=aa,
        kappa=kappa,
        per_class=per_class,
        samples=total,
        missing_classes=missing,
        missing_class_warning=bool(missing),
    )


def report_from_predictions(truth: np.ndarray, predicted: np.ndarray, num_classes: int) -> EvalReport:
    if len(truth) == 0:
        raise EmptyTestSet("cannot evaluate an empty test set")
    return report_from_confusion(confusion_matrix(truth, predicted, num_classes))


def _predict_chunk(model: RSCNet, patches: PatchSet, index: np.ndarray) -> np.ndarray:
    with no_grad():
        out = np.empty(len(index), dtype=np.int64)
        for j, i in enumerate(index):
            reduced = None if patches.reduced is None else patches.reduced[i]
            logits = model.forward(patches.hsi[i], reduced, patches.aux[i]).data
            out[j] = int(np.argmax(logits)) + 1
        return out


def predict(model: RSCNet, patches: PatchSet, threads: int = 1) -> np.ndarray:
    """Predicted class ids (1..C) in patch order.

    Chunks run on a thread pool under no_grad; results are concatenated in chunk order,
    so the output does not depend on the worker count.
    """
    n = len(patches)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    threads = max(1, int(threads))
    chunks = [c for c in np.array_split(np.arange(n), min(n, threads * 4)) if c.size]
    if threads == 1:
        parts = [_predict_chunk(model, patches, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _predict_chunk(model, patches, c), chunks))
    logger.debug("Predicted", samples=n, threads=threads, chunks=len(chunks))
    return np.concatenate(parts)


def evaluate(model: RSCNet, patches: PatchSet, threads: int = 1) -> EvalReport:
    if len(patches) == 0:
        raise EmptyTestSet("cannot evaluate an empty test set")
    predicted = predict(model, patches, threads=threads)
    report = report_from_predictions(patches.labels, predicted, model.config.num_classes)
    logger.info("Evaluation finished", samples=report.samples, oa=round(report.oa, 4), kappa=round(report.kappa, 4))
    return report
