"""Model checkpoints: `<name>.json` manifest + `<name>.raw` little-endian float64 payload."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ValidationError

from ..dataio.cube_io import cube_paths
from ..errors import CheckpointError, ConfigurationError
from .rscnet import ModelConfig, RSCNet

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]
FORMAT_VERSION = 1


class ParameterEntry(BaseModel):
    name: str
    shape: List[int]
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape)) if self.shape else 1


class CheckpointManifest(BaseModel):
    format_version: int = FORMAT_VERSION
    dtype: str = "f64le"
    seed: int
    config: Dict[str, Any]
    parameters: List[ParameterEntry]
    extra: Dict[str, Any] = {}


def save_arrays(
    arrays: Dict[str, np.ndarray],
    path: PathLike,
    seed: int = 0,
    config: Optional[Dict[str, Any]] = None,
    **extra,
) -> CheckpointManifest:
    """Write named arrays back to back in one payload, in the given order."""
    entries = []
    offset = 0
    for name, value in arrays.items():
        entries.append(ParameterEntry(name=name, shape=list(np.shape(value)), offset=offset))
        offset += int(np.size(value))
    manifest = CheckpointManifest(seed=seed, config=config or {}, parameters=entries, extra=extra)

    manifest_path, payload_path = cube_paths(path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    payload = b"".join(
        np.ascontiguousarray(value, dtype="<f8").tobytes(order="C") for value in arrays.values()
    )
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest.model_dump(mode="json"), f, indent=2, sort_keys=True)
    with open(payload_path, "wb") as f:
        f.write(payload)
    logger.debug("Arrays saved", path=str(manifest_path), count=len(entries), values=offset)
    return manifest


def load_arrays(path: PathLike) -> Tuple[CheckpointManifest, Dict[str, np.ndarray]]:
    manifest_path, payload_path = cube_paths(path)
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = CheckpointManifest(**json.load(f))
    except FileNotFoundError:
        raise CheckpointError(f"{manifest_path}: checkpoint manifest not found") from None
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise CheckpointError(f"{manifest_path}: invalid manifest ({e})") from None
    if manifest.format_version != FORMAT_VERSION or manifest.dtype != "f64le":
        raise CheckpointError(
            f"{manifest_path}: unsupported format {manifest.format_version}/{manifest.dtype}"
        )

    try:
        payload = np.frombuffer(Path(payload_path).read_bytes(), dtype="<f8")
    except FileNotFoundError:
        raise CheckpointError(f"{payload_path}: checkpoint payload not found") from None
    expected = sum(entry.size for entry in manifest.parameters)
    if payload.size != expected:
        raise CheckpointError(f"{payload_path}: {payload.size} values, manifest declares {expected}")

    arrays = {
        entry.name: payload[entry.offset:entry.offset + entry.size].reshape(entry.shape).astype(np.float64)
        for entry in manifest.parameters
    }
    return manifest, arrays


def save_checkpoint(model: RSCNet, path: PathLike, **extra) -> CheckpointManifest:
    manifest = save_arrays(
        model.state_dict(),
        path,
        seed=model.config.seed,
        config=model.config.model_dump(mode="json"),
        **extra,
    )
    logger.info("Checkpoint saved", path=str(cube_paths(path)[0]), parameters=model.count_params())
    return manifest


def restore_model(manifest: CheckpointManifest, arrays: Dict[str, np.ndarray], path: PathLike = "") -> RSCNet:
    """Rebuild the model from a loaded manifest and its parameter arrays."""
    try:
        config = ModelConfig(**manifest.config)
    except (ValidationError, ConfigurationError) as e:
        raise CheckpointError(f"{path}: stored model config is invalid ({e})") from None
    model = RSCNet(config)
    model.load_state_dict(arrays)
    logger.info("Checkpoint loaded", path=str(path), parameters=model.count_params())
    return model


def load_checkpoint(path: PathLike) -> RSCNet:
    """Rebuild the model from the stored config and load its parameters."""
    manifest, arrays = load_arrays(path)
    return restore_model(manifest, arrays, path)
