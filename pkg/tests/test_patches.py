"""Tests for patch extraction and train/test splitting."""

import numpy as np
import pytest

from specband.dataio import HyperCube, LabelRaster, SourceKind, extract_patches, split
from specband.errors import EvenPatchSize, InsufficientSamples, RegistrationMismatch


def _scene(labels, bands=2, aux_bands=1):
    h, w = labels.shape
    hsi = HyperCube(values=np.arange(bands * h * w, dtype=np.float64).reshape(bands, h, w))
    aux = HyperCube(
        values=-np.arange(aux_bands * h * w, dtype=np.float64).reshape(aux_bands, h, w),
        source_kind=SourceKind.AUX,
    )
    return hsi, aux, LabelRaster(labels=labels)


def test_center_pixel_patch_needs_no_padding():
    """Test a single labeled pixel at the center of an 11×11 image with p=11."""
    labels = np.zeros((11, 11), dtype=np.int64)
    labels[5, 5] = 1
    hsi, aux, raster = _scene(labels)
    patches = extract_patches(hsi, aux, raster, 11)
    assert len(patches) == 1
    assert patches.hsi.shape == (1, 2, 11, 11)
    assert np.array_equal(patches.hsi[0], hsi.values)
    assert np.array_equal(patches.centers, [[5, 5]])


def test_corner_patch_uses_reflect_padding():
    """Test that a corner patch mirrors the neighbors without repeating the edge."""
    labels = np.zeros((4, 4), dtype=np.int64)
    labels[0, 0] = 2
    hsi, aux, raster = _scene(labels, bands=1)
    patch = extract_patches(hsi, aux, raster, 3).hsi[0, 0]
    values = hsi.values[0]
    assert patch[1, 1] == values[0, 0]
    assert patch[0, 0] == values[1, 1]
    assert patch[0, 1] == values[1, 0]
    assert patch[1, 0] == values[0, 1]


def test_one_patch_per_labeled_pixel_in_row_major_order(rng):
    """Test patch count equals label count and centers are row-major."""
    labels = rng.integers(0, 4, size=(9, 7))
    hsi, aux, raster = _scene(labels)
    patches = extract_patches(hsi, aux, raster, 5)
    assert len(patches) == int((labels > 0).sum())
    keys = patches.centers[:, 0] * 7 + patches.centers[:, 1]
    assert np.all(np.diff(keys) > 0)
    assert np.array_equal(patches.labels, labels[labels > 0])
    assert patches.aux.shape[1:] == (1, 5, 5)


def test_patch_size_and_registration_errors():
    """Test even patch sizes and mismatched rasters."""
    labels = np.ones((4, 4), dtype=np.int64)
    hsi, aux, raster = _scene(labels)
    with pytest.raises(EvenPatchSize):
        extract_patches(hsi, aux, raster, 4)
    other = HyperCube(values=np.zeros((1, 5, 4)))
    with pytest.raises(RegistrationMismatch):
        extract_patches(hsi, other, raster, 3)


def test_split_is_stratified_disjoint_and_seeded(rng):
    """Test exact per-class train counts, disjointness and determinism."""
    labels = np.repeat([1, 2, 3], [20, 30, 15]).reshape(5, 13)
    hsi, aux, raster = _scene(labels)
    patches = extract_patches(hsi, aux, raster, 3)

    train, test = split(patches, 4, seed=7)
    assert train.class_counts() == {1: 4, 2: 4, 3: 4}
    assert len(train) + len(test) == len(patches)
    train_keys = {tuple(c) for c in train.centers}
    test_keys = {tuple(c) for c in test.centers}
    assert not train_keys & test_keys

    again, _ = split(patches, 4, seed=7)
    assert np.array_equal(again.centers, train.centers)
    other, _ = split(patches, 4, seed=8)
    assert not np.array_equal(other.centers, train.centers)


def test_split_edge_counts():
    """Test per_class_train of zero and of the full population."""
    labels = np.repeat([1, 2], [6, 6]).reshape(3, 4)
    hsi, aux, raster = _scene(labels)
    patches = extract_patches(hsi, aux, raster, 3)

    train, test = split(patches, 0, seed=0)
    assert len(train) == 0 and len(test) == 12

    train, test = split(patches, 6, seed=0)
    assert len(train) == 12 and len(test) == 0

    with pytest.raises(InsufficientSamples):
        split(patches, 7, seed=0)


def test_interior_patches_follow_translation(rng):
    """Test that interior patches equal the cube window and move with a shifted scene."""
    values = rng.standard_normal((3, 12, 12))
    labels = np.zeros((12, 12), dtype=np.int64)
    labels[3:9, 4:10] = 1
    aux = HyperCube(values=values[:1] * 2.0, source_kind=SourceKind.AUX)
    patches = extract_patches(HyperCube(values=values), aux, LabelRaster(labels=labels), 5)
    for patch, (r, c) in zip(patches.hsi, patches.centers):
        assert np.array_equal(patch, values[:, r - 2:r + 3, c - 2:c + 3])

    # the same scene cropped by one row and two columns
    shifted = extract_patches(
        HyperCube(values=values[:, 1:, 2:]),
        HyperCube(values=aux.values[:, 1:, 2:], source_kind=SourceKind.AUX),
        LabelRaster(labels=labels[1:, 2:]),
        5,
    )
    assert np.array_equal(shifted.centers, patches.centers - [1, 2])
    assert np.array_equal(shifted.hsi, patches.hsi)
    assert np.array_equal(shifted.aux, patches.aux)
