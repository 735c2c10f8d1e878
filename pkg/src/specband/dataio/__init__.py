"""Raster cubes, labeled patches and synthetic scenes."""

from .cube_io import (
    read_array,
    read_cube,
    read_header,
    read_labels,
    write_array,
    write_cube,
    write_labels,
)
from .models import (
    CubeHeader,
    HyperCube,
    LabelRaster,
    PatchSet,
    SourceKind,
    SynthScene,
    SynthSpec,
    check_registered,
)
from .patches import attach_reduced, extract_patches, split
from .synth import synth_generate

__all__ = [
    "CubeHeader",
    "HyperCube",
    "LabelRaster",
    "PatchSet",
    "SourceKind",
    "SynthScene",
    "SynthSpec",
    "attach_reduced",
    "check_registered",
    "extract_patches",
    "read_array",
    "read_cube",
    "read_header",
    "read_labels",
    "split",
    "synth_generate",
    "write_array",
    "write_cube",
    "write_labels",
]
