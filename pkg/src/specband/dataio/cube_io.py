"""Portable cube file format: `<name>.json` header + `<name>.raw` payload.

Payload is band-sequential, row-major within each band, little-endian.
"""

import json
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import structlog
from pydantic import ValidationError

from ..errors import HeaderMismatch, TruncatedPayload, UnsupportedDtype
from ..utils.validation import cube_stem, stem_file
from .models import CubeHeader, HyperCube, LabelRaster, SourceKind

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

DTYPES: Dict[str, np.dtype] = {
    "f32le": np.dtype("<f4"),
    "f64le": np.dtype("<f8"),
    "i32le": np.dtype("<i4"),
}


def cube_paths(path: PathLike) -> Tuple[Path, Path]:
    """Resolve the header and payload paths for a cube stem or either file."""
    stem = cube_stem(path)
    return stem_file(stem, ".json"), stem_file(stem, ".raw")


def read_header(path: PathLike) -> CubeHeader:
    """Parse and validate a cube header without touching the payload."""
    header_path, _ = cube_paths(path)
    try:
        with open(header_path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise HeaderMismatch(f"{header_path}: invalid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise HeaderMismatch(f"{header_path}: header must be a JSON object")

    dtype = raw.get("dtype")
    if dtype is not None and dtype not in DTYPES:
        raise UnsupportedDtype(f"{header_path}: unsupported dtype '{dtype}'")
    try:
        return CubeHeader(**raw)
    except ValidationError as e:
        raise HeaderMismatch(f"{header_path}: {e.errors()[0]['loc']} {e.errors()[0]['msg']}") from None


def read_array(path: PathLike) -> Tuple[CubeHeader, np.ndarray]:
    """Read a raster as a bands×height×width array in its stored dtype."""
    header = read_header(path)
    _, payload_path = cube_paths(path)
    dtype = DTYPES[header.dtype]
    expected = header.value_count * dtype.itemsize
    payload = Path(payload_path).read_bytes()
    if len(payload) < expected:
        raise TruncatedPayload(
            f"{payload_path}: {len(payload)} bytes, header declares {expected}"
        )
    if len(payload) > expected:
        raise HeaderMismatch(
            f"{payload_path}: {len(payload)} bytes, header declares {expected}"
        )
    values = np.frombuffer(payload, dtype=dtype).reshape(
        header.bands, header.height, header.width
    )
    return header, values.copy()


def write_array(values: np.ndarray, path: PathLike, dtype: str, **extra) -> CubeHeader:
    """Write a bands×height×width array with the given dtype tag."""
    if dtype not in DTYPES:
        raise UnsupportedDtype(f"unsupported dtype '{dtype}'")
    if values.ndim != 3:
        raise HeaderMismatch(f"expected bands×height×width values, got shape {values.shape}")
    header = CubeHeader(
        bands=values.shape[0],
        height=values.shape[1],
        width=values.shape[2],
        dtype=dtype,
        **extra,
    )
    header_path, payload_path = cube_paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(values, dtype=DTYPES[dtype]).tobytes(order="C")
    with open(header_path, "w", encoding="utf-8") as f:
        json.dump(header.model_dump(mode="json", exclude_none=True), f, indent=2, sort_keys=True)
    with open(payload_path, "wb") as f:
        f.write(payload)
    logger.debug("Raster written", path=str(header_path), shape=values.shape, dtype=dtype)
    return header


def read_cube(path: PathLike) -> HyperCube:
    """Read a float cube (f32le or f64le)."""
    header, values = read_array(path)
    if header.dtype == "i32le":
        raise UnsupportedDtype(f"{path}: integer rasters are label rasters, not cubes")
    kind = header.source_kind or SourceKind.HSI
    return HyperCube(values=values, source_kind=kind)


def write_cube(cube: HyperCube, path: PathLike) -> CubeHeader:
    """Write a cube in f32le (or f64le when the values are float64)."""
    dtype = "f64le" if cube.values.dtype == np.float64 else "f32le"
    return write_array(cube.values, path, dtype, source_kind=cube.source_kind)


def read_labels(path: PathLike) -> LabelRaster:
    header, values = read_array(path)
    if header.dtype != "i32le" or header.bands != 1:
        raise HeaderMismatch(f"{path}: label rasters are single-band i32le")
    return LabelRaster(labels=values[0].astype(np.int64))


def write_labels(labels: LabelRaster, path: PathLike) -> CubeHeader:
    return write_array(labels.labels[None, :, :], path, "i32le")
