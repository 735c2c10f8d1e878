"""`select-bands` and `analyze` command implementations."""

import json
from pathlib import Path
from typing import Dict, List, Optional, Union

import structlog

from ..errors import ConfigurationError, IndexOutOfRange
from ..preprocess.normalize import normalize
from ..training.experiments import DatasetSelection, dataset_band_selection
from ..training.redundancy import RedundancyReport, redundancy_report
from ..utils.validation import cube_stem
from .manifest import load_inputs, start_manifest, write_json, write_manifest
from .train import Split, load_trained, subset_of

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def run_select_bands(
    checkpoint: PathLike,
    hsi: PathLike,
    aux: PathLike,
    labels: PathLike,
    out: PathLike,
    split: Split = "train",
    band_ratio: Optional[float] = None,
    block: int = 0,
    threads: int = 1,
) -> DatasetSelection:
    """Average the band scores over the chosen patches and write `selection.json`.

    The document holds `k`, `indices` and `scores` plus per-band selection frequency.
    """
    out = Path(out)
    manifest = start_manifest(
        "select-bands",
        [cube_stem(checkpoint), hsi, aux, labels],
        split=split,
        band_ratio=band_ratio,
        block=block,
    )
    with manifest.timed("prepare"):
        model, data = load_trained(checkpoint, hsi, aux, labels)
    manifest.seed = model.config.seed
    if not 0 <= block < model.config.num_blocks:
        raise ConfigurationError(f"--block {block} outside [0, {model.config.num_blocks})")

    with manifest.timed("score"):
        chosen = dataset_band_selection(
            model, subset_of(data, split), threads=threads, block=block, ratio=band_ratio
        )

    document = {
        "k": chosen.selection.k,
        "indices": chosen.selection.indices,
        "scores": chosen.selection.scores,
        "bands": chosen.selection.bands,
        "ratio": chosen.selection.ratio,
        "frequency": chosen.frequency,
        "samples": chosen.samples,
    }
    path = write_json(document, out / "selection.json")
    manifest.add_output(out, path)
    write_manifest(manifest, out)
    return chosen


def read_selection(path: PathLike) -> List[int]:
    """Band indices from a `selection.json` document."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
        return [int(i) for i in document["indices"]]
    except FileNotFoundError:
        raise ConfigurationError(f"{path}: selection file not found") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"{path}: not a band selection document ({e})") from None


def run_analyze(
    hsi: PathLike,
    aux: PathLike,
    labels: PathLike,
    out: PathLike,
    selected: Optional[List[int]] = None,
    acc: bool = True,
    mi: bool = True,
) -> Dict[str, RedundancyReport]:
    """ACC/MI of the labeled-pixel spectra, over all bands and over the selected subset."""
    out = Path(out)
    if not (acc or mi):
        acc = mi = True
    manifest = start_manifest("analyze", [hsi, aux, labels], selected=selected, acc=acc, mi=mi)

    with manifest.timed("analyze"):
        hsi_cube, _, label_raster = load_inputs(hsi, aux, labels)
        mask = label_raster.mask
        features = normalize(hsi_cube, mask).pixels(mask)
        targets = label_raster.labels[mask]
        all_bands = list(range(hsi_cube.bands))
        reports = {"all_bands": redundancy_report(features, targets, all_bands, acc=acc, mi=mi)}
        if selected:
            bad = [b for b in selected if not 0 <= b < hsi_cube.bands]
            if bad:
                raise IndexOutOfRange(f"selected bands {bad} outside [0, {hsi_cube.bands})")
            reports["selected_bands"] = redundancy_report(
                features[:, selected], targets, list(selected), acc=acc, mi=mi
            )

    path = write_json({name: r.model_dump(mode="json") for name, r in reports.items()}, out / "analysis.json")
    manifest.add_output(out, path)
    write_manifest(manifest, out)
    logger.info(
        "Redundancy analysis written",
        out=str(path),
        **{f"{name}_acc": r.acc for name, r in reports.items()},
    )
    return reports
