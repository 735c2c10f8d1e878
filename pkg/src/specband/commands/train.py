"""`train` and `eval` command implementations."""

import csv
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel

from ..dataio.cube_io import cube_paths, write_array
from ..errors import CheckpointError, DivergedLoss
from ..nn.checkpoint import load_arrays, restore_model, save_arrays, save_checkpoint
from ..nn.rscnet import RSCNet
from ..preprocess.pca import load_pca, save_pca
from ..training.metrics import EvalReport, predict, report_from_predictions
from ..training.pipeline import PreparedData, prepare_data
from ..training.trainer import TrainConfig, train, write_loss_csv
from ..utils.validation import cube_stem
from .manifest import load_inputs, start_manifest, write_json, write_manifest

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]
Split = Literal["train", "test", "all"]

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


class TrainSummary(BaseModel):
    checkpoint: str
    parameters: int
    epochs: int
    final_loss: float
    train_samples: int
    test_samples: int
    selected_bands: int


class DataOptions(BaseModel):
    """How the training split was cut; stored with the checkpoint so eval can recut it."""
    patch_size: int = 11
    per_class_train: int = 20
    split_seed: int = 0
    reduced_bands: Optional[int] = None
    use_pca: bool = True


def run_train(
    hsi: PathLike,
    aux: PathLike,
    labels: PathLike,
    out: PathLike,
    data_options: DataOptions,
    train_config: TrainConfig,
    model_options: Optional[Dict[str, Any]] = None,
) -> TrainSummary:
    """Prepare the data, train RSCNet and write checkpoint, PCA model, loss curve and manifest.

    Raises:
        DivergedLoss: after the state dump is written to `diverged_state`
    """
    out = Path(out)
    model_options = dict(model_options or {})
    manifest = start_manifest(
        "train",
        [hsi, aux, labels],
        seed=train_config.seed,
        data=data_options.model_dump(mode="json"),
        train=train_config.model_dump(mode="json"),
        model=model_options,
    )

    with manifest.timed("prepare"):
        hsi_cube, aux_cube, label_raster = load_inputs(hsi, aux, labels)
        data = prepare_data(
            hsi_cube,
            aux_cube,
            label_raster,
            data_options.patch_size,
            data_options.per_class_train,
            data_options.split_seed,
            reduced_bands=data_options.reduced_bands,
            use_pca=data_options.use_pca,
        )
        config = data.model_config(**model_options)
        model = RSCNet(config)
    manifest.config["model"] = config.model_dump(mode="json")

    try:
        with manifest.timed("train"):
            result = train(model, data.train, train_config)
    except DivergedLoss as e:
        dump = out / "diverged_state"
        save_arrays(e.state or {}, dump, seed=train_config.seed, epoch=e.epoch, step=e.step)
        manifest.add_output(out, *cube_paths(dump))
        write_manifest(manifest, out)
        logger.error("Diverged state written", path=str(dump), epoch=e.epoch, step=e.step)
        raise

    with manifest.timed("write"):
        checkpoint = out / "model"
        pca_name = None
        if data.pca is not None:
            pca_name = "pca"
            save_pca(data.pca, out / pca_name)
            manifest.add_output(out, *cube_paths(out / pca_name))
        save_checkpoint(
            model,
            checkpoint,
            data=data_options.model_dump(mode="json"),
            pca=pca_name,
            final_loss=result.loss_curve[-1],
        )
        write_loss_csv(result.loss_curve, out / "loss.csv")
        manifest.add_output(out, *cube_paths(checkpoint), out / "loss.csv")
    write_manifest(manifest, out)

    return TrainSummary(
        checkpoint=str(checkpoint),
        parameters=model.count_params(),
        epochs=len(result.loss_curve),
        final_loss=result.loss_curve[-1],
        train_samples=len(data.train),
        test_samples=len(data.test),
        selected_bands=config.selected_bands,
    )


def load_trained(
    checkpoint: PathLike, hsi: PathLike, aux: PathLike, labels: PathLike
) -> Tuple[RSCNet, PreparedData]:
    """Restore a trained model and recut the data exactly as training did."""
    stored, arrays = load_arrays(checkpoint)
    model = restore_model(stored, arrays, checkpoint)
    try:
        options = DataOptions(**stored.extra.get("data", {}))
    except ValueError as e:
        raise CheckpointError(f"{checkpoint}: invalid data options ({e})") from None

    pca = None
    pca_name = stored.extra.get("pca")
    if model.config.use_pca and pca_name:
        pca = load_pca(cube_paths(checkpoint)[0].parent / pca_name)

    hsi_cube, aux_cube, label_raster = load_inputs(hsi, aux, labels)
    data = prepare_data(
        hsi_cube,
        aux_cube,
        label_raster,
        model.config.patch_size,
        options.per_class_train,
        options.split_seed,
        reduced_bands=options.reduced_bands,
        use_pca=model.config.use_pca,
        pca=pca,
    )
    return model, data


def subset_of(data: PreparedData, split: Split):
    return {"train": data.train, "test": data.test, "all": data.patches}[split]


def classification_map(data: PreparedData, predicted: np.ndarray) -> np.ndarray:
    """height×width class ids at every labeled pixel, 0 elsewhere."""
    out = np.zeros((data.labels.height, data.labels.width), dtype=np.int64)
    centers = data.patches.centers
    out[centers[:, 0], centers[:, 1]] = predicted
    return out


def palette(num_classes: int) -> Dict[str, Any]:
    colors: Dict[str, Any] = {"0": None}
    for class_id in range(1, num_classes + 1):
        colors[str(class_id)] = PALETTE[(class_id - 1) % len(PALETTE)]
    return {"unlabeled": 0, "colors": colors}


def write_embeddings(
    model: RSCNet, data: PreparedData, split: Split, predicted: np.ndarray, path: PathLike
) -> Path:
    """`label,pred,e0..e{d-1}` rows for the evaluated patches."""
    subset = subset_of(data, split)
    path = Path(path)
    rows: List[List[Any]] = []
    for i in range(len(subset)):
        reduced = None if subset.reduced is None else subset.reduced[i]
        vector = model.embed(subset.hsi[i], reduced, subset.aux[i])
        rows.append([int(subset.labels[i]), int(predicted[i])] + [repr(float(v)) for v in vector])
    width = len(rows[0]) - 2 if rows else 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["label", "pred"] + [f"e{j}" for j in range(width)])
        writer.writerows(rows)
    return path


def run_eval(
    checkpoint: PathLike,
    hsi: PathLike,
    aux: PathLike,
    labels: PathLike,
    out: PathLike,
    split: Split = "test",
    threads: int = 1,
    export_embeddings: bool = False,
) -> EvalReport:
    """Evaluate a checkpoint; writes report.json, classification_map, palette.json and manifest."""
    out = Path(out)
    manifest = start_manifest(
        "eval",
        [cube_stem(checkpoint), hsi, aux, labels],
        split=split,
        threads=threads,
        export_embeddings=export_embeddings,
    )
    with manifest.timed("prepare"):
        model, data = load_trained(checkpoint, hsi, aux, labels)
    manifest.seed = model.config.seed

    with manifest.timed("predict"):
        predicted_all = predict(model, data.patches, threads=threads)
        class_map = classification_map(data, predicted_all)
        subset = subset_of(data, split)
        predicted = class_map[subset.centers[:, 0], subset.centers[:, 1]] if len(subset) else np.zeros(0, np.int64)
        report = report_from_predictions(subset.labels, predicted, model.config.num_classes)

    with manifest.timed("write"):
        report_path = write_json(report.model_dump(mode="json"), out / "report.json")
        write_array(class_map[None, :, :], out / "classification_map", "i32le")
        palette_path = write_json(palette(model.config.num_classes), out / "palette.json")
        manifest.add_output(out, report_path, *cube_paths(out / "classification_map"), palette_path)
        if export_embeddings:
            manifest.add_output(
                out, write_embeddings(model, data, split, predicted, out / "embeddings.csv")
            )
    write_manifest(manifest, out)
    logger.info("Evaluation written", out=str(out), split=split, oa=round(report.oa, 4))
    return report
