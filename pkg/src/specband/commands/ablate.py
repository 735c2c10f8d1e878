"""`ablate`: train every component variant on one split and tabulate the results."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import structlog

from ..errors import ConfigurationError
from ..training.experiments import DEFAULT_VARIANTS, AblationReport, run_ablation
from ..training.pipeline import prepare_data
from ..training.trainer import TrainConfig
from .manifest import load_inputs, start_manifest, write_json, write_manifest
from .train import DataOptions

logger = structlog.get_logger(__name__)


def resolve_variants(names: Optional[List[str]]) -> Dict[str, Dict[str, Any]]:
    if not names:
        return dict(DEFAULT_VARIANTS)
    unknown = [n for n in names if n not in DEFAULT_VARIANTS]
    if unknown:
        raise ConfigurationError(
            f"unknown variants {unknown}; choose from {sorted(DEFAULT_VARIANTS)}"
        )
    return {n: DEFAULT_VARIANTS[n] for n in names}


def run_ablate(
    hsi: Union[str, Path],
    aux: Union[str, Path],
    labels: Union[str, Path],
    out: Union[str, Path],
    data_options: DataOptions,
    train_config: TrainConfig,
    model_options: Optional[Dict[str, Any]] = None,
    variants: Optional[List[str]] = None,
    threads: int = 1,
) -> AblationReport:
    out = Path(out)
    chosen = resolve_variants(variants)
    manifest = start_manifest(
        "ablate",
        [hsi, aux, labels],
        seed=train_config.seed,
        data=data_options.model_dump(mode="json"),
        train=train_config.model_dump(mode="json"),
        model=dict(model_options or {}),
        variants=list(chosen),
    )
    with manifest.timed("prepare"):
        hsi_cube, aux_cube, label_raster = load_inputs(hsi, aux, labels)
        # PCA is always fitted so the no_pca variant runs on the same split as the others.
        data = prepare_data(
            hsi_cube,
            aux_cube,
            label_raster,
            data_options.patch_size,
            data_options.per_class_train,
            data_options.split_seed,
            reduced_bands=data_options.reduced_bands,
            use_pca=True,
        )
        base = data.model_config(**(model_options or {}))

    with manifest.timed("variants"):
        report = run_ablation(data, base, train_config, chosen, threads=threads)

    path = write_json(report.model_dump(mode="json"), out / "ablation.json")
    manifest.add_output(out, path)
    write_manifest(manifest, out)
    return report
