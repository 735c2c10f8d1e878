"""Tests for the command line."""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from specband.cli import cli
from specband.dataio import HyperCube, LabelRaster, SourceKind, write_cube, write_labels
from specband.utils import digest_files

QUICK_TRAIN = [
    "--patch-size", "5", "--per-class-train", "4", "--epochs", "1", "--blocks", "1",
    "--batch-size", "8", "--band-ratio", "0.5",
]


@pytest.fixture
def runner():
    return CliRunner()


def _inputs(stems):
    return ["--hsi", stems["hsi"], "--aux", stems["aux"], "--labels", stems["labels"]]


def test_synth_writes_scene_and_truth(runner, temp_dir):
    """Test planted bands echoed, cube files written and reruns byte-identical."""
    args = ["synth", "--bands", "30", "--planted", "2,7,19", "--classes", "3", "--seed", "1",
            "--height", "12", "--width", "12"]
    first = runner.invoke(cli, args + ["--out", f"{temp_dir}/a"])
    assert first.exit_code == 0, first.output
    assert "planted bands: 2,7,19" in first.output
    truth = json.loads(Path(f"{temp_dir}/a/truth.json").read_text())
    assert truth["planted"] == [2, 7, 19]

    runner.invoke(cli, args + ["--out", f"{temp_dir}/b"])
    names = ["hsi", "aux", "labels", "truth.json"]
    a = digest_files([f"{temp_dir}/a/{n}" for n in names])
    b = digest_files([f"{temp_dir}/b/{n}" for n in names])
    assert list(a.values()) == list(b.values())


def test_synth_rejects_out_of_range_planted(runner, temp_dir):
    """Test exit 2 and a message naming the bound."""
    result = runner.invoke(cli, ["synth", "--planted", "40", "--bands", "30", "--out", temp_dir])
    assert result.exit_code == 2
    assert "[0, 30)" in result.output


def test_synth_manifest_records_spec(runner, temp_dir):
    """Test that the run manifest carries the seed and the full scene spec."""
    result = runner.invoke(cli, ["synth", "--height", "8", "--width", "8", "--bands", "6",
                                 "--seed", "4", "--out", temp_dir])
    assert result.exit_code == 0, result.output
    manifest = json.loads(Path(temp_dir, "manifest.json").read_text())
    assert manifest["seed"] == 4
    assert manifest["config"]["spec"]["bands"] == 6


def test_unexpected_errors_exit_cleanly(runner, temp_dir, mocker):
    """Test exit 1 for errors outside the hierarchy and 4 for arithmetic failures."""
    mocker.patch("specband.commands.run_synth", side_effect=TypeError("bad call"))
    result = runner.invoke(cli, ["synth", "--out", temp_dir])
    assert result.exit_code == 1
    assert "internal error: TypeError: bad call" in result.output

    mocker.patch("specband.commands.run_synth", side_effect=FloatingPointError("overflow"))
    assert runner.invoke(cli, ["synth", "--out", temp_dir]).exit_code == 4


def test_band_ratio_out_of_range(runner, scene_files, temp_dir):
    """Test that --band-ratio 1.5 is a usage error."""
    result = runner.invoke(
        cli, ["train", *_inputs(scene_files), "--band-ratio", "1.5", "--out", f"{temp_dir}/run"]
    )
    assert result.exit_code == 2


def test_missing_input_is_io_error(runner, scene_files, temp_dir):
    """Test exit 3 when a cube file does not exist."""
    stems = dict(scene_files, hsi=f"{temp_dir}/nowhere")
    result = runner.invoke(cli, ["train", *_inputs(stems), *QUICK_TRAIN, "--out", f"{temp_dir}/run"])
    assert result.exit_code == 3


def test_train_eval_select_pipeline(runner, scene_files, temp_dir):
    """Test train, eval and select-bands on a small synthetic scene."""
    run = f"{temp_dir}/run"
    result = runner.invoke(cli, ["train", *_inputs(scene_files), *QUICK_TRAIN, "--out", run])
    assert result.exit_code == 0, result.output
    for name in ("model.json", "model.raw", "pca.json", "loss.csv", "manifest.json"):
        assert Path(run, name).exists(), name
    manifest = json.loads(Path(run, "manifest.json").read_text())
    assert manifest["command"] == "train"
    assert "loss.csv" in manifest["outputs"]

    result = runner.invoke(
        cli, ["eval", "--checkpoint", f"{run}/model", *_inputs(scene_files), "--split", "all",
              "--export-embeddings", "--out", f"{temp_dir}/eval"]
    )
    assert result.exit_code == 0, result.output
    report = json.loads(Path(temp_dir, "eval", "report.json").read_text())
    assert 0.0 <= report["oa"] <= 1.0
    assert report["samples"] == 16 * 16
    assert Path(temp_dir, "eval", "classification_map.raw").stat().st_size == 16 * 16 * 4
    assert Path(temp_dir, "eval", "embeddings.csv").read_text().startswith("label,pred,e0")

    result = runner.invoke(
        cli, ["select-bands", "--checkpoint", f"{run}/model", *_inputs(scene_files),
              "--band-ratio", "1.0", "--out", f"{temp_dir}/bands"]
    )
    assert result.exit_code == 0, result.output
    selection = json.loads(Path(temp_dir, "bands", "selection.json").read_text())
    assert selection["indices"] == list(range(12))

    result = runner.invoke(
        cli, ["analyze", *_inputs(scene_files), "--selection", f"{temp_dir}/bands/selection.json",
              "--out", f"{temp_dir}/analysis"]
    )
    assert result.exit_code == 0, result.output


def test_analyze_duplicated_bands(runner, rng, temp_dir):
    """Test ACC = 1 for a cube whose two bands are identical."""
    band = rng.standard_normal((8, 8))
    write_cube(HyperCube(values=np.stack([band, band]).astype(np.float32)), f"{temp_dir}/hsi")
    write_cube(HyperCube(values=rng.standard_normal((1, 8, 8)), source_kind=SourceKind.AUX), f"{temp_dir}/aux")
    write_labels(LabelRaster(labels=rng.integers(1, 3, size=(8, 8))), f"{temp_dir}/labels")

    result = runner.invoke(
        cli, ["analyze", "--hsi", f"{temp_dir}/hsi", "--aux", f"{temp_dir}/aux",
              "--labels", f"{temp_dir}/labels", "--acc", "--out", f"{temp_dir}/out"]
    )
    assert result.exit_code == 0, result.output
    analysis = json.loads(Path(temp_dir, "out", "analysis.json").read_text())
    assert analysis["all_bands"]["acc"] == pytest.approx(1.0)
    assert analysis["all_bands"]["mi"] is None


def test_analyze_rejects_bad_band(runner, scene_files, temp_dir):
    """Test exit 2 for a selected band beyond the cube."""
    result = runner.invoke(
        cli, ["analyze", *_inputs(scene_files), "--bands", "0,99", "--out", f"{temp_dir}/out"]
    )
    assert result.exit_code == 2


def test_gradcheck_command(runner):
    """Test that a fresh toy model passes the gradient check."""
    result = runner.invoke(cli, ["gradcheck", "--samples-per-leaf", "2"])
    assert result.exit_code == 0, result.output
    assert "max relative error" in result.output


def test_threads_must_be_positive(runner):
    """Test that --threads 0 is rejected."""
    assert runner.invoke(cli, ["--threads", "0", "version"]).exit_code == 2


def test_version(runner):
    result = runner.invoke(cli, ["version"])
    assert result.exit_code == 0
    assert result.output.startswith("specband v")
