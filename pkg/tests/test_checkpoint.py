"""Tests for model checkpoints."""

import json
from pathlib import Path

import numpy as np
import pytest

from specband.errors import CheckpointError
from specband.nn import load_arrays, load_checkpoint, save_arrays, save_checkpoint


def test_checkpoint_round_trip(toy_model, toy_batch, temp_dir):
    """Test that a reloaded model has identical parameters and logits."""
    save_checkpoint(toy_model, f"{temp_dir}/model", final_loss=0.5)
    loaded = load_checkpoint(f"{temp_dir}/model")
    assert loaded.config == toy_model.config
    hsi, reduced, aux = toy_batch
    assert np.array_equal(
        loaded.forward_batch(hsi, reduced, aux).data, toy_model.forward_batch(hsi, reduced, aux).data
    )


def test_manifest_records_names_and_extra(toy_model, temp_dir):
    """Test the manifest lists every parameter in order and keeps extra fields."""
    manifest = save_checkpoint(toy_model, f"{temp_dir}/model", data={"patch_size": 5})
    names = [entry.name for entry in manifest.parameters]
    assert names == [name for name, _ in toy_model.named_parameters()]
    stored = json.loads(Path(f"{temp_dir}/model.json").read_text())
    assert stored["extra"]["data"] == {"patch_size": 5}
    assert stored["seed"] == 0


def test_arrays_round_trip(rng, temp_dir):
    """Test named arrays of mixed shapes, including a scalar."""
    arrays = {"a": rng.standard_normal((2, 3)), "b": np.array(4.0), "c": rng.standard_normal(5)}
    save_arrays(arrays, f"{temp_dir}/state", seed=9, epoch=2)
    manifest, loaded = load_arrays(f"{temp_dir}/state")
    assert manifest.seed == 9 and manifest.extra == {"epoch": 2}
    for name, value in arrays.items():
        assert np.array_equal(loaded[name], value)


def test_missing_and_truncated(toy_model, temp_dir):
    """Test missing files and a short payload."""
    with pytest.raises(CheckpointError):
        load_checkpoint(f"{temp_dir}/absent")
    save_checkpoint(toy_model, f"{temp_dir}/model")
    payload = Path(f"{temp_dir}/model.raw")
    payload.write_bytes(payload.read_bytes()[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(f"{temp_dir}/model")


def test_invalid_stored_config(toy_model, temp_dir):
    """Test that an out-of-range stored config is a checkpoint error."""
    save_checkpoint(toy_model, f"{temp_dir}/model")
    path = Path(f"{temp_dir}/model.json")
    doc = json.loads(path.read_text())
    doc["config"]["patch_size"] = 4
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        load_checkpoint(f"{temp_dir}/model")


def test_parameter_shape_mismatch(toy_model, temp_dir):
    """Test that a renamed parameter is rejected on load."""
    save_checkpoint(toy_model, f"{temp_dir}/model")
    path = Path(f"{temp_dir}/model.json")
    doc = json.loads(path.read_text())
    doc["parameters"][0]["name"] = "renamed"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        load_checkpoint(f"{temp_dir}/model")
