"""Experiment harnesses: dataset-level band selection, planted-band recovery, ablations."""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

import numpy as np
import structlog
from pydantic import BaseModel

from ..dataio.models import PatchSet, SynthSpec
from ..dataio.synth import synth_generate
from ..errors import InsufficientSamples
from ..nn.kbsm import BandSelection, random_selection, select_topk
from ..nn.rscnet import ModelConfig, RSCNet
from ..tensor import no_grad
from .metrics import evaluate
from .pipeline import PreparedData, band_features, prepare_scene
from .redundancy import RedundancyReport, redundancy_report
from .trainer import TrainConfig, train

logger = structlog.get_logger(__name__)

DEFAULT_VARIANTS: Dict[str, Dict[str, Any]] = {
    "full": {},
    "no_kbsm": {"band_selector": "random"},
    "no_cafm": {"fusion": "cross_attention"},
    "hsi_only": {"sources": "hsi"},
    "aux_only": {"sources": "aux"},
    "no_pca": {"use_pca": False},
    "single_block": {"num_blocks": 1},
}


class DatasetSelection(BaseModel):
    """Top-k over patch-averaged scores plus how often each band was picked per patch."""
    selection: BandSelection
    frequency: List[float]
    samples: int


def _score_chunk(model: RSCNet, patches: PatchSet, index: np.ndarray, block: int):
    bands = model.config.bands
    score_sum = np.zeros(bands)
    picked = np.zeros(bands)
    with no_grad():
        for i in index:
            reduced = None if patches.reduced is None else patches.reduced[i]
            trace = model.forward_trace(patches.hsi[i], reduced, patches.aux[i])
            if trace.scores:
                score_sum += trace.scores[min(block, len(trace.scores) - 1)]
            picked[trace.selections[min(block, len(trace.selections) - 1)].indices] += 1
    return score_sum, picked


def dataset_band_selection(
    model: RSCNet,
    patches: PatchSet,
    threads: int = 1,
    block: int = 0,
    ratio: Optional[float] = None,
) -> DatasetSelection:
    """Aggregate one block's band scores over a patch set and apply the top-k rule.

    ratio overrides the model's band ratio for the dataset-level selection only.
    """
    n = len(patches)
    if n == 0:
        raise InsufficientSamples("band selection needs at least one patch")
    chunks = [c for c in np.array_split(np.arange(n), min(n, max(1, threads) * 4)) if c.size]
    if threads <= 1:
        parts = [_score_chunk(model, patches, c, block) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _score_chunk(model, patches, c, block), chunks))
    score_sum = np.sum([p[0] for p in parts], axis=0)
    picked = np.sum([p[1] for p in parts], axis=0)

    config = model.config
    ratio = config.band_ratio if ratio is None else ratio
    if config.band_selector == "random":
        selection = random_selection(config.bands, ratio, config.seed)
    else:
        selection = select_topk(score_sum / n, ratio, config.bands)
    logger.info("Dataset band selection", samples=n, indices=selection.indices)
    return DatasetSelection(
        selection=selection, frequency=(picked / n).tolist(), samples=n
    )


class RecoveryResult(BaseModel):
    seed: int
    planted: List[int]
    selected: List[int]
    hits: int
    final_loss: float
    oa: Optional[float] = None


def planted_recovery(
    spec: SynthSpec,
    patch_size: int = 7,
    per_class_train: int = 40,
    train_config: Optional[TrainConfig] = None,
    threads: int = 1,
    **model_overrides: Any,
) -> RecoveryResult:
    """Train on a synthetic scene with k = |planted| and count planted bands recovered."""
    train_config = train_config or TrainConfig(seed=spec.seed)
    scene = synth_generate(spec)
    data = prepare_scene(scene, patch_size, per_class_train, spec.seed)
    overrides = {"band_ratio": len(scene.planted) / spec.bands, "seed": spec.seed}
    overrides.update(model_overrides)
    model = RSCNet(data.model_config(**overrides))
    result = train(model, data.train, train_config)
    chosen = dataset_band_selection(model, data.train, threads=threads)
    hits = len(set(chosen.selection.indices) & set(scene.planted))
    logger.info("Planted-band recovery", seed=spec.seed, hits=hits, planted=scene.planted, selected=chosen.selection.indices)
    return RecoveryResult(
        seed=spec.seed,
        planted=scene.planted,
        selected=chosen.selection.indices,
        hits=hits,
        final_loss=result.loss_curve[-1],
    )


def redundancy_comparison(
    data: PreparedData, selection: BandSelection, which: str = "all"
) -> Dict[str, RedundancyReport]:
    """ACC/MI of the center-pixel spectra over all bands vs the selected subset."""
    features = band_features(data, which)
    subset = {"all": data.patches, "train": data.train, "test": data.test}[which]
    all_bands = list(range(features.shape[1]))
    return {
        "all_bands": redundancy_report(features, subset.labels, all_bands),
        "selected_bands": redundancy_report(
            features[:, selection.indices], subset.labels, selection.indices
        ),
    }


class AblationRow(BaseModel):
    name: str
    overrides: Dict[str, Any]
    oa: float
    aa: float
    kappa: float
    params: int
    final_loss: float
    seconds: float


class AblationReport(BaseModel):
    seed: int
    rows: List[AblationRow]

    def row(self, name: str) -> AblationRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def run_ablation(
    data: PreparedData,
    base: ModelConfig,
    train_config: TrainConfig,
    variants: Optional[Dict[str, Dict[str, Any]]] = None,
    threads: int = 1,
) -> AblationReport:
    """Train and evaluate each variant under the same seed and split."""
    variants = DEFAULT_VARIANTS if variants is None else variants
    rows = []
    for name, overrides in variants.items():
        started = time.perf_counter()
        config = base.model_copy(update=overrides)
        config = ModelConfig(**config.model_dump())
        model = RSCNet(config)
        result = train(model, data.train, train_config)
        report = evaluate(model, data.test, threads=threads)
        rows.append(
            AblationRow(
                name=name,
                overrides=overrides,
                oa=report.oa,
                aa=report.aa,
                kappa=report.kappa,
                params=model.count_params(),
                final_loss=result.loss_curve[-1],
                seconds=time.perf_counter() - started,
            )
        )
        logger.info("Ablation variant finished", variant=name, oa=round(report.oa, 4), params=rows[-1].params)
    return AblationReport(seed=base.seed, rows=rows)
