"""Per-band standardization."""

from typing import Optional

import numpy as np
import structlog

from ..dataio.models import HyperCube
from ..errors import EmptyCube, ShapeMismatch

logger = structlog.get_logger(__name__)


def normalize(cube: HyperCube, mask: Optional[np.ndarray] = None) -> HyperCube:
    """Zero mean, unit (population) variance per band.

    Statistics come from the pixels selected by `mask` (the labeled region) or from every
    pixel when no mask is given; the transform is applied to the whole cube. Constant
    bands map to all zeros.

    Args:
        cube: Input cube
        mask: Optional height×width boolean mask of pixels to take statistics from

    Returns:
        A float64 cube of the same shape and source kind
    """
    if cube.height == 0 or cube.width == 0 or cube.bands == 0:
        raise EmptyCube(f"cube has no extent: {cube.values.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (cube.height, cube.width):
            raise ShapeMismatch(
                f"mask shape {mask.shape} does not match cube {(cube.height, cube.width)}"
            )
        if not mask.any():
            raise EmptyCube("normalization mask selects no pixels")

    pixels = cube.pixels(mask).astype(np.float64)
    mean = pixels.mean(axis=0)
    std = pixels.std(axis=0)
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))

    values = cube.values.astype(np.float64) - mean[:, None, None]
    scale = np.where(constant, 1.0, std)
    values = values / scale[:, None, None]
    values[constant] = 0.0

    if constant.any():
        logger.debug("Constant bands zeroed", bands=np.flatnonzero(constant).tolist())
    return HyperCube(values=values, source_kind=cube.source_kind)
