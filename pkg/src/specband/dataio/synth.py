"""Synthetic multi-source scenes with planted informative bands.

Layout: the image is partitioned into Voronoi regions, each assigned a class
(round-robin so every class appears). Spectra:

- planted band b, class j: base_b + gap * ((j + rank_b) mod C) + noise
- other bands: base_b + scale_b * (sqrt(rho) * L + sqrt(1 - rho) * E_b) + noise,
  with L a per-pixel latent shared by all non-planted bands and E_b independent per band;
  both are centered within each class, so only planted bands separate class means
- aux band a, class j: gap_aux * level_j + phase_a + aux noise, where the first
  `aux_shared_classes` classes share one structural level

Shadowed regions replace the HSI planted signature by the next class's signature.
"""

from typing import Tuple

import numpy as np
import structlog

from .models import HyperCube, LabelRaster, SourceKind, SynthScene, SynthSpec

logger = structlog.get_logger(__name__)


def _regions(spec: SynthSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Voronoi region id per pixel and the class of each region (0-based)."""
    count = spec.classes * spec.regions_per_class
    seeds = rng.uniform(0, 1, size=(count, 2)) * np.array([spec.height, spec.width])
    rows, cols = np.mgrid[0:spec.height, 0:spec.width]
    grid = np.stack([rows, cols], axis=-1).astype(np.float64) + 0.5
    distances = ((grid[:, :, None, :] - seeds[None, None, :, :]) ** 2).sum(axis=-1)
    region = distances.argmin(axis=-1)
    region_class = np.arange(count) % spec.classes
    return region, region_class


def _center_per_class(field: np.ndarray, class_map: np.ndarray, classes: int) -> np.ndarray:
    """Subtract each class's spatial mean so the field carries no class signal."""
    out = np.array(field, dtype=np.float64, copy=True)
    for j in range(classes):
        members = class_map == j
        if members.any():
            out[..., members] -= out[..., members].mean(axis=-1, keepdims=True)
    return out


def class_signatures(spec: SynthSpec) -> np.ndarray:
    """Expected class offset per band (C×c): nonzero only on planted bands."""
    signatures = np.zeros((spec.classes, spec.bands), dtype=np.float64)
    for rank, band in enumerate(sorted(spec.planted_bands)):
        for j in range(spec.classes):
            signatures[j, band] = spec.class_signature_gap * ((j + rank) % spec.classes)
    return signatures


def aux_levels(spec: SynthSpec) -> np.ndarray:
    """Structural level per class; leading `aux_shared_classes` classes coincide."""
    shared = max(spec.aux_shared_classes, 1)
    return np.array([max(j - shared + 1, 0) for j in range(spec.classes)], dtype=np.float64)


def synth_generate(spec: SynthSpec) -> SynthScene:
    """Generate a seeded, bit-reproducible scene."""
    rng = np.random.default_rng(spec.seed)
    h, w, c = spec.height, spec.width, spec.bands

    region, region_class = _regions(spec, rng)
    class_map = region_class[region]

    shadow_regions = rng.uniform(size=region_class.size) < spec.shadow_fraction
    shadow_mask = shadow_regions[region]

    signatures = class_signatures(spec)
    base = rng.uniform(0.5, 1.5, size=c)
    scale = rng.uniform(0.5, 1.5, size=c)
    latent = _center_per_class(rng.standard_normal((h, w)), class_map, spec.classes)
    independent = _center_per_class(rng.standard_normal((c, h, w)), class_map, spec.classes)
    noise = rng.standard_normal((c, h, w))

    planted = np.zeros(c, dtype=bool)
    planted[spec.planted_bands] = True

    rho = spec.redundancy_rho
    hsi = np.empty((c, h, w), dtype=np.float64)
    redundant = scale[:, None, None] * (
        np.sqrt(rho) * latent[None, :, :] + np.sqrt(1.0 - rho) * independent
    )
    hsi[~planted] = redundant[~planted]
    hsi_class = np.where(shadow_mask, (class_map + 1) % spec.classes, class_map)
    hsi[planted] = np.transpose(signatures[hsi_class][:, :, planted], (2, 0, 1))
    hsi += base[:, None, None] + spec.noise_sigma * noise

    levels = aux_levels(spec)
    phase = rng.uniform(-0.5, 0.5, size=spec.aux_bands)
    aux_noise = rng.standard_normal((spec.aux_bands, h, w))
    aux = (
        spec.aux_gap * levels[class_map][None, :, :]
        + phase[:, None, None]
        + spec.aux_noise_sigma * aux_noise
    )

    labels = class_map + 1
    if spec.labeled_fraction < 1.0:
        keep = rng.uniform(size=(h, w)) < spec.labeled_fraction
        labels = np.where(keep, labels, 0)

    scene = SynthScene(
        hsi=HyperCube(values=hsi.astype(np.float32), source_kind=SourceKind.HSI),
        aux=HyperCube(values=aux.astype(np.float32), source_kind=SourceKind.AUX),
        labels=LabelRaster(labels=labels.astype(np.int64)),
        planted=sorted(int(b) for b in spec.planted_bands),
        class_signatures=signatures,
        shadow_mask=shadow_mask,
    )
    logger.info(
        "Synthetic scene generated",
        height=h,
        width=w,
        bands=c,
        classes=spec.classes,
        planted=scene.planted,
        shadowed_pixels=int(shadow_mask.sum()),
        seed=spec.seed,
    )
    return scene
