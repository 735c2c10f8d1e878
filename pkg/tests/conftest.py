"""Shared fixtures: small synthetic scenes, prepared data and on-disk cubes."""

import shutil
import tempfile

import numpy as np
import pytest
import structlog

from specband.dataio import SynthSpec, synth_generate, write_cube, write_labels
from specband.nn import ModelConfig, RSCNet
from specband.training import prepare_scene


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep test output free of structlog console lines."""
    structlog.configure(wrapper_class=structlog.make_filtering_bound_logger(40))
    yield


@pytest.fixture
def temp_dir():
    """Create a temporary output directory."""
    path = tempfile.mkdtemp()
    yield path
    shutil.rmtree(path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec():
    """16×16 three-class scene, 12 bands with 3 planted, 2 aux channels."""
    return SynthSpec(
        height=16,
        width=16,
        classes=3,
        bands=12,
        aux_bands=2,
        planted_bands=[1, 5, 9],
        class_signature_gap=1.0,
        noise_sigma=0.05,
        seed=3,
    )


@pytest.fixture
def small_scene(small_spec):
    return synth_generate(small_spec)


@pytest.fixture
def small_data(small_scene):
    """Patches of size 5 with 6 training samples per class and a 2-band PCA stream."""
    return prepare_scene(small_scene, patch_size=5, per_class_train=6, seed=0)


@pytest.fixture
def toy_config():
    return ModelConfig(
        bands=6,
        aux_bands=2,
        num_classes=2,
        patch_size=5,
        band_ratio=0.5,
        num_blocks=1,
        reduced_bands=2,
        seed=0,
    )


@pytest.fixture
def toy_model(toy_config):
    return RSCNet(toy_config)


@pytest.fixture
def toy_batch(rng):
    """Two random samples shaped for `toy_config`: (hsi, reduced, aux)."""
    return (
        rng.standard_normal((2, 6, 5, 5)),
        rng.standard_normal((2, 2, 5, 5)),
        rng.standard_normal((2, 2, 5, 5)),
    )


@pytest.fixture
def scene_files(small_scene, temp_dir):
    """The small scene written as `hsi`, `aux` and `labels` cube stems."""
    stems = {name: f"{temp_dir}/scene/{name}" for name in ("hsi", "aux", "labels")}
    write_cube(small_scene.hsi, stems["hsi"])
    write_cube(small_scene.aux, stems["aux"])
    write_labels(small_scene.labels, stems["labels"])
    return stems
