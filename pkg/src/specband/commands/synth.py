"""`synth`: write a synthetic scene and its planted-band truth."""

from pathlib import Path
from typing import Any, Dict, Union

import structlog

from ..dataio.cube_io import cube_paths, write_cube, write_labels
from ..dataio.models import SynthSpec
from ..dataio.synth import synth_generate
from .manifest import start_manifest, write_json, write_manifest

logger = structlog.get_logger(__name__)


def run_synth(spec: SynthSpec, out: Union[str, Path]) -> Dict[str, Any]:
    """Generate the scene and write `hsi`, `aux`, `labels` cubes plus `truth.json`.

    Returns:
        The truth document
    """
    out = Path(out)
    manifest = start_manifest("synth", [], seed=spec.seed, spec=spec.model_dump(mode="json"))
    with manifest.timed("generate"):
        scene = synth_generate(spec)

    with manifest.timed("write"):
        paths = {name: out / name for name in ("hsi", "aux", "labels")}
        write_cube(scene.hsi, paths["hsi"])
        write_cube(scene.aux, paths["aux"])
        write_labels(scene.labels, paths["labels"])
        truth = {
            "planted": scene.planted,
            "classes": spec.classes,
            "bands": spec.bands,
            "seed": spec.seed,
            "class_signatures": scene.class_signatures.tolist(),
            "shadowed_pixels": int(scene.shadow_mask.sum()),
        }
        truth_path = write_json(truth, out / "truth.json")

    for path in paths.values():
        manifest.add_output(out, *cube_paths(path))
    manifest.add_output(out, truth_path)
    write_manifest(manifest, out)
    logger.info("Synthetic scene written", out=str(out), planted=scene.planted)
    return truth
