"""Run manifests and shared loaders for command implementations."""

import json
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import structlog
from pydantic import BaseModel, Field

from .. import __version__
from ..dataio.cube_io import read_cube, read_labels
from ..dataio.models import HyperCube, LabelRaster, SourceKind
from ..utils.digest import digest_files
from ..utils.validation import validate_input_path

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]
MANIFEST_NAME = "manifest.json"


class RunManifest(BaseModel):
    """One per command run, written to the root of the output directory."""

    command: str
    version: str = __version__
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict, description="path -> sha256")
    outputs: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict, description="stage -> seconds")

    def add_output(self, out_dir: Path, *paths: PathLike) -> None:
        for path in paths:
            path = Path(path)
            try:
                self.outputs.append(str(path.relative_to(out_dir)))
            except ValueError:
                self.outputs.append(str(path))

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = round(time.perf_counter() - started, 6)


def start_manifest(command: str, inputs: List[PathLike], seed: Optional[int] = None, **config) -> RunManifest:
    return RunManifest(command=command, seed=seed, config=config, inputs=digest_files(inputs))


def write_manifest(manifest: RunManifest, out_dir: PathLike) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    write_json(manifest.model_dump(mode="json"), path)
    logger.info("Run manifest written", command=manifest.command, path=str(path), outputs=len(manifest.outputs))
    return path


def write_json(document: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_inputs(hsi: PathLike, aux: PathLike, labels: PathLike):
    """Read the co-registered HSI cube, auxiliary cube and label raster."""
    hsi_cube: HyperCube = read_cube(validate_input_path(hsi))
    aux_cube: HyperCube = read_cube(validate_input_path(aux))
    if aux_cube.source_kind is SourceKind.HSI:
        aux_cube = HyperCube(values=aux_cube.values, source_kind=SourceKind.AUX)
    label_raster: LabelRaster = read_labels(validate_input_path(labels))
    logger.info(
        "Inputs loaded",
        bands=hsi_cube.bands,
        aux_bands=aux_cube.bands,
        height=hsi_cube.height,
        width=hsi_cube.width,
        classes=label_raster.num_classes,
    )
    return hsi_cube, aux_cube, label_raster
