"""Spectral redundancy (ACC) and label dependency (MI) of band features."""

from typing import List, Optional

import numpy as np
import structlog
from pydantic import BaseModel
from sklearn.metrics import mutual_info_score

from ..errors import DegenerateInput, ShapeMismatch

logger = structlog.get_logger(__name__)

MI_BINS = 16


class RedundancyReport(BaseModel):
    acc: Optional[float] = None
    mi: Optional[float] = None
    bands: List[int]
    excluded_bands: List[int] = []


def _as_matrix(features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"band features must be an n×c matrix, got {x.shape}")
    return x


def constant_bands(features: np.ndarray) -> np.ndarray:
    x = _as_matrix(features)
    return np.flatnonzero(x.std(axis=0) <= 1e-12 * np.maximum(1.0, np.abs(x).max(axis=0)))


def redundancy_acc(features: np.ndarray) -> float:
    """Mean |Pearson r| over all distinct pairs of varying bands."""
    x = _as_matrix(features)
    if x.shape[0] < 2:
        raise DegenerateInput(f"ACC needs at least 2 samples, got {x.shape[0]}")
    constant = constant_bands(x)
    if constant.size:
        logger.warning("Constant bands excluded from ACC", bands=constant.tolist())
    varying = np.setdiff1d(np.arange(x.shape[1]), constant)
    if varying.size < 2:
        raise DegenerateInput(f"ACC needs at least 2 varying bands, got {varying.size}")

    corr = np.corrcoef(x[:, varying], rowvar=False)
    upper = np.triu_indices(varying.size, k=1)
    return float(np.clip(np.abs(corr[upper]).mean(), 0.0, 1.0))


def equal_frequency_bins(values: np.ndarray, bins: int = MI_BINS) -> np.ndarray:
    """Bin id per sample from the rank of each value's first occurrence; ties share a bin."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    first_rank = np.searchsorted(np.sort(values), values, side="left")
    return (first_rank * bins) // n


def redundancy_mi(features: np.ndarray, labels: np.ndarray, bins: int = MI_BINS) -> float:
    """Mean over bands of the plug-in MI (nats) between the binned band and the labels."""
    x = _as_matrix(features)
    labels = np.asarray(labels)
    if labels.shape != (x.shape[0],):
        raise ShapeMismatch(f"{labels.shape} labels for {x.shape[0]} samples")
    if x.shape[0] < bins:
        raise DegenerateInput(f"MI needs at least {bins} samples, got {x.shape[0]}")
    if x.shape[1] == 0:
        raise DegenerateInput("MI needs at least one band")

    values = [
        mutual_info_score(labels, equal_frequency_bins(x[:, band], bins))
        for band in range(x.shape[1])
    ]
    return float(max(np.mean(values), 0.0))


def redundancy_report(
    features: np.ndarray,
    labels: Optional[np.ndarray],
    bands: List[int],
    acc: bool = True,
    mi: bool = True,
) -> RedundancyReport:
    return RedundancyReport(
        acc=redundancy_acc(features) if acc else None,
        mi=redundancy_mi(features, labels) if mi and labels is not None else None,
        bands=list(bands),
        excluded_bands=[bands[i] for i in constant_bands(features)],
    )
