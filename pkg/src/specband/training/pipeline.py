"""From co-registered rasters to train/test patch sets.

normalize (labeled-region statistics) → patches → stratified split → PCA fitted on the
training pixels only → reduced patches cut at the same centers.
"""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import structlog

from ..dataio.models import HyperCube, LabelRaster, PatchSet, SynthScene, check_registered
from ..dataio.patches import attach_reduced, extract_patches, split
from ..nn.rscnet import ModelConfig
from ..preprocess.normalize import normalize
from ..preprocess.pca import PcaModel, pca_apply, pca_fit

logger = structlog.get_logger(__name__)


@dataclass
class PreparedData:
    patches: PatchSet
    train: PatchSet
    test: PatchSet
    hsi: HyperCube
    aux: HyperCube
    labels: LabelRaster
    pca: Optional[PcaModel] = None

    @property
    def bands(self) -> int:
        return self.hsi.bands

    @property
    def aux_bands(self) -> int:
        return self.aux.bands

    @property
    def num_classes(self) -> int:
        return self.labels.num_classes

    def model_config(self, **overrides: Any) -> ModelConfig:
        """ModelConfig matching the data shapes; overrides win."""
        values = {
            "bands": self.bands,
            "aux_bands": self.aux_bands,
            "num_classes": self.num_classes,
            "patch_size": self.patches.patch_size,
        }
        if self.pca is not None:
            values["reduced_bands"] = self.pca.reduced_bands
        else:
            values["use_pca"] = False
        values.update(overrides)
        return ModelConfig(**values)


def prepare_data(
    hsi: HyperCube,
    aux: HyperCube,
    labels: LabelRaster,
    patch_size: int,
    per_class_train: int,
    seed: int,
    reduced_bands: Optional[int] = None,
    use_pca: bool = True,
    pca: Optional[PcaModel] = None,
) -> PreparedData:
    """Normalize, cut patches, split and (optionally) reduce the HSI stream.

    Args:
        hsi: Hyperspectral cube
        aux: Co-registered auxiliary cube
        labels: Label raster
        patch_size: Odd patch size
        per_class_train: Training samples per class
        seed: Split seed
        reduced_bands: PCA target band count (defaults to the aux channel count)
        use_pca: Build the reduced stream
        pca: Previously fitted model to reuse instead of fitting on the training pixels

    Returns:
        PreparedData with reduced patches attached when PCA is used
    """
    check_registered(hsi, aux, labels)
    mask = labels.mask
    hsi_n = normalize(hsi, mask)
    aux_n = normalize(aux, mask)

    patches = extract_patches(hsi_n, aux_n, labels, patch_size)
    train, test = split(patches, per_class_train, seed)

    if use_pca:
        if pca is None:
            r = reduced_bands if reduced_bands is not None else min(aux.bands, hsi.bands)
            rows, cols = train.centers[:, 0], train.centers[:, 1]
            pixels = hsi_n.values[:, rows, cols].T
            pca = pca_fit(pixels, r)
        reduced = pca_apply(pca, hsi_n)
        patches = attach_reduced(patches, reduced)
        train = attach_reduced(train, reduced)
        test = attach_reduced(test, reduced)
    else:
        pca = None

    logger.info(
        "Data prepared",
        patches=len(patches),
        train=len(train),
        test=len(test),
        classes=labels.num_classes,
        reduced_bands=None if pca is None else pca.reduced_bands,
    )
    return PreparedData(
        patches=patches, train=train, test=test, hsi=hsi_n, aux=aux_n, labels=labels, pca=pca
    )


def prepare_scene(scene: SynthScene, patch_size: int, per_class_train: int, seed: int, **kwargs) -> PreparedData:
    return prepare_data(scene.hsi, scene.aux, scene.labels, patch_size, per_class_train, seed, **kwargs)


def band_features(data: PreparedData, which: str = "all") -> np.ndarray:
    """Center-pixel spectra (n×c) of the normalized HSI for the chosen subset."""
    subset = {"all": data.patches, "train": data.train, "test": data.test}[which]
    rows, cols = subset.centers[:, 0], subset.centers[:, 1]
    return data.hsi.values[:, rows, cols].T
