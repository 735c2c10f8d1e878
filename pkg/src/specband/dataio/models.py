"""Raster, patch and synthetic-scene data models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..errors import HeaderMismatch, InvalidSpec, RegistrationMismatch, ShapeMismatch


class SourceKind(str, Enum):
    """Which sensor a cube comes from."""
    HSI = "hsi"
    AUX = "aux"


class CubeHeader(BaseModel):
    """JSON header of a cube file (`<name>.json` next to `<name>.raw`)."""
    height: int = Field(..., ge=1)
    width: int = Field(..., ge=1)
    bands: int = Field(..., ge=1)
    dtype: str = "f32le"
    layout: Literal["bsq"] = "bsq"
    source_kind: Optional[SourceKind] = None

    @property
    def value_count(self) -> int:
        return self.height * self.width * self.bands


@dataclass
class HyperCube:
    """A band-sequential raster: values has shape (bands, height, width)."""
    values: np.ndarray
    source_kind: SourceKind = SourceKind.HSI

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ShapeMismatch(f"cube values must be bands×height×width, got {self.values.shape}")

    @property
    def bands(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    def pixels(self, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """Pixel spectra as an n×bands matrix (row-major over pixels)."""
        flat = self.values.reshape(self.bands, -1).T
        if mask is None:
            return flat
        return flat[np.asarray(mask, dtype=bool).reshape(-1)]


@dataclass
class LabelRaster:
    """Per-pixel class ids: 0 = unlabeled, 1..C = classes."""
    labels: np.ndarray

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ShapeMismatch(f"label raster must be height×width, got {self.labels.shape}")
        if (self.labels < 0).any():
            raise HeaderMismatch("label raster holds negative class ids")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def mask(self) -> np.ndarray:
        return self.labels > 0

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def class_ids(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.labels) if c > 0)


def check_registered(*rasters) -> Tuple[int, int]:
    """All rasters must share height and width."""
    sizes = {(r.height, r.width) for r in rasters if r is not None}
    if len(sizes) != 1:
        raise RegistrationMismatch(f"rasters are not co-registered: sizes {sorted(sizes)}")
    return sizes.pop()


@dataclass
class PatchSet:
    """Labeled patches, channel-first in memory.

    hsi: n×c×p×p, aux: n×c_aux×p×p, reduced: n×r×p×p (optional),
    labels: n class ids in 1..C, centers: n×2 (row, col).
    """
    hsi: np.ndarray
    aux: np.ndarray
    labels: np.ndarray
    centers: np.ndarray
    patch_size: int
    reduced: Optional[np.ndarray] = None
    num_classes: int = 0

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def take(self, indices) -> "PatchSet":
        index = np.asarray(indices, dtype=np.int64)
        return PatchSet(
            hsi=self.hsi[index],
            aux=self.aux[index],
            labels=self.labels[index],
            centers=self.centers[index],
            patch_size=self.patch_size,
            reduced=None if self.reduced is None else self.reduced[index],
            num_classes=self.num_classes,
        )

    def class_counts(self) -> dict:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}


class SynthSpec(BaseModel):
    """Synthetic multi-source scene with planted informative bands."""
    height: int = Field(32, ge=4)
    width: int = Field(32, ge=4)
    classes: int = Field(3, ge=2)
    bands: int = Field(30, ge=2)
    aux_bands: int = Field(4, ge=1)
    planted_bands: List[int] = Field(default_factory=lambda: [2, 7, 11, 16, 21, 26])
    class_signature_gap: float = Field(0.5, gt=0)
    noise_sigma: float = 0.1
    redundancy_rho: float = 0.9
    aux_gap: float = Field(1.0, ge=0)
    aux_noise_sigma: float = 0.1
    aux_shared_classes: int = Field(0, ge=0)
    shadow_fraction: float = 0.0
    labeled_fraction: float = 1.0
    regions_per_class: int = Field(3, ge=1)
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _check_ranges(cls, data):
        # Bounds are reported as InvalidSpec rather than pydantic's ValidationError.
        if not isinstance(data, dict):
            return data
        bands = data.get("bands", 30)
        planted = data.get("planted_bands", None)
        if planted is not None:
            for b in planted:
                if not 0 <= int(b) < int(bands):
                    raise InvalidSpec(f"planted band {b} outside [0, {bands})")
            if not 1 <= len(planted) <= int(bands):
                raise InvalidSpec(f"planted band count must be in [1, {bands}]")
            if len(set(int(b) for b in planted)) != len(planted):
                raise InvalidSpec("planted bands must be distinct")
        if float(data.get("noise_sigma", 0.0)) < 0:
            raise InvalidSpec("noise_sigma must be >= 0")
        if float(data.get("aux_noise_sigma", 0.0)) < 0:
            raise InvalidSpec("aux_noise_sigma must be >= 0")
        rho = float(data.get("redundancy_rho", 0.9))
        if not 0.0 <= rho <= 1.0:
            raise InvalidSpec("redundancy_rho must be in [0, 1]")
        for name in ("shadow_fraction",):
            value = float(data.get(name, 0.0))
            if not 0.0 <= value <= 1.0:
                raise InvalidSpec(f"{name} must be in [0, 1]")
        labeled = float(data.get("labeled_fraction", 1.0))
        if not 0.0 < labeled <= 1.0:
            raise InvalidSpec("labeled_fraction must be in (0, 1]")
        classes = int(data.get("classes", 3))
        shared = int(data.get("aux_shared_classes", 0))
        if shared > classes:
            raise InvalidSpec(f"aux_shared_classes {shared} exceeds classes {classes}")
        return data


@dataclass
class SynthScene:
    """Generator output: co-registered cubes, labels and the planted truth."""
    hsi: HyperCube
    aux: HyperCube
    labels: LabelRaster
    planted: List[int]
    class_signatures: np.ndarray
    shadow_mask: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=bool))
