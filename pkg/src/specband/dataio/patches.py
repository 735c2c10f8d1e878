"""Labeled-patch extraction and stratified train/test splits."""

from typing import Optional, Tuple

import numpy as np
import structlog

from ..errors import EvenPatchSize, InsufficientSamples
from .models import HyperCube, LabelRaster, PatchSet, check_registered

logger = structlog.get_logger(__name__)


def _windows(values: np.ndarray, centers: np.ndarray, p: int) -> np.ndarray:
    """Cut p×p windows (channel-first) around centers of a reflect-padded raster."""
    margin = p // 2
    padded = np.pad(values, ((0, 0), (margin, margin), (margin, margin)), mode="reflect")
    out = np.empty((len(centers), values.shape[0], p, p), dtype=np.float64)
    for i, (row, col) in enumerate(centers):
        # Padded coordinates shift by margin, so the window starts at (row, col).
        out[i] = padded[:, row:row + p, col:col + p]
    return out


def extract_patches(
    hsi: HyperCube,
    aux: HyperCube,
    labels: LabelRaster,
    p: int,
    reduced: Optional[HyperCube] = None,
) -> PatchSet:
    """One patch per labeled pixel, row-major by center, reflect padding at borders.

    Args:
        hsi: Full hyperspectral cube
        aux: Co-registered SAR/LiDAR-like cube
        labels: Label raster (0 = unlabeled)
        p: Odd patch size
        reduced: Optional spectrally reduced cube cut at the same centers

    Returns:
        PatchSet with channel-first patches
    """
    if p < 1 or p % 2 == 0:
        raise EvenPatchSize(f"patch size must be odd and positive, got {p}")
    check_registered(hsi, aux, labels, reduced)

    rows, cols = np.nonzero(labels.labels)
    centers = np.stack([rows, cols], axis=1).astype(np.int64)
    patch_set = PatchSet(
        hsi=_windows(hsi.values, centers, p),
        aux=_windows(aux.values, centers, p),
        labels=labels.labels[rows, cols].astype(np.int64),
        centers=centers,
        patch_size=p,
        reduced=None if reduced is None else _windows(reduced.values, centers, p),
        num_classes=labels.num_classes,
    )
    logger.debug("Patches extracted", count=len(patch_set), patch_size=p)
    return patch_set


def split(patches: PatchSet, per_class_train: int, seed: int) -> Tuple[PatchSet, PatchSet]:
    """Stratified, seeded, disjoint train/test split.

    Args:
        patches: All labeled patches
        per_class_train: Training samples drawn from every class
        seed: Shuffle seed

    Returns:
        (train, test); test holds every patch not drawn for training
    """
    if per_class_train < 0:
        raise InsufficientSamples(f"per_class_train must be >= 0, got {per_class_train}")
    rng = np.random.default_rng(seed)
    train_index = []
    for class_id in sorted(np.unique(patches.labels)):
        members = np.flatnonzero(patches.labels == class_id)
        if per_class_train > members.size:
            raise InsufficientSamples(
                f"class {int(class_id)} has {members.size} samples, {per_class_train} requested"
            )
        chosen = rng.permutation(members)[:per_class_train]
        train_index.extend(chosen.tolist())

    train_index = np.sort(np.asarray(train_index, dtype=np.int64))
    test_mask = np.ones(len(patches), dtype=bool)
    test_mask[train_index] = False
    test_index = np.flatnonzero(test_mask)
    logger.info("Split created", train=len(train_index), test=len(test_index), seed=seed)
    return patches.take(train_index), patches.take(test_index)


def attach_reduced(patches: PatchSet, reduced: HyperCube) -> PatchSet:
    """Cut reduced-cube windows at the existing patch centers."""
    return PatchSet(
        hsi=patches.hsi,
        aux=patches.aux,
        labels=patches.labels,
        centers=patches.centers,
        patch_size=patches.patch_size,
        reduced=_windows(reduced.values, patches.centers, patches.patch_size),
        num_classes=patches.num_classes,
    )
