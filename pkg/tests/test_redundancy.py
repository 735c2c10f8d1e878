"""Tests for the ACC and MI redundancy diagnostics."""

import numpy as np
import pytest

from specband.errors import DegenerateInput, ShapeMismatch
from specband.training import redundancy_acc, redundancy_mi, redundancy_report
from specband.training.redundancy import equal_frequency_bins


def test_duplicate_and_negated_bands(rng):
    """Test |r| = 1 for a duplicated band and for a negated band."""
    x = rng.standard_normal(200)
    assert redundancy_acc(np.stack([x, x], axis=1)) == pytest.approx(1.0)
    assert redundancy_acc(np.stack([x, -x], axis=1)) == pytest.approx(1.0)


def test_independent_bands(rng):
    """Test that independent standard-normal bands are nearly uncorrelated."""
    assert redundancy_acc(rng.standard_normal((10000, 6))) < 0.05


def test_acc_is_affine_invariant(rng):
    """Test that x → 3x + 1 per band leaves ACC unchanged."""
    x = rng.standard_normal((500, 5)) @ rng.standard_normal((5, 5))
    assert redundancy_acc(3 * x + 1) == pytest.approx(redundancy_acc(x), abs=1e-12)


def test_constant_bands_are_excluded(rng):
    """Test that a constant band is dropped and reported."""
    x = rng.standard_normal(100)
    features = np.stack([x, np.full(100, 2.0), x], axis=1)
    assert redundancy_acc(features) == pytest.approx(1.0)
    report = redundancy_report(features, None, [4, 7, 9], mi=False)
    assert report.excluded_bands == [7]
    assert report.mi is None
    with pytest.raises(DegenerateInput):
        redundancy_acc(features[:, :2])


def test_mi_of_label_band():
    """Test that a band equal to a balanced binary label carries ln 2."""
    labels = np.repeat([1, 2], 5000)
    assert redundancy_mi(labels[:, None].astype(float), labels) == pytest.approx(np.log(2), abs=1e-2)


def test_mi_of_shuffled_band(rng):
    """Test that a band independent of the labels carries almost nothing."""
    labels = rng.integers(1, 4, size=10000)
    band = rng.standard_normal(10000)
    assert redundancy_mi(band[:, None], labels) <= 0.02


def test_equal_frequency_bins(rng):
    """Test 16 roughly equal bins and shared bins for ties."""
    bins = equal_frequency_bins(rng.standard_normal(1600))
    assert np.bincount(bins).tolist() == [100] * 16
    tied = equal_frequency_bins(np.array([0.0] * 8 + [1.0] * 8), bins=4)
    assert tied.tolist() == [0] * 8 + [2] * 8


def test_mi_input_errors(rng):
    """Test mismatched labels and too few samples."""
    with pytest.raises(ShapeMismatch):
        redundancy_mi(rng.standard_normal((20, 2)), np.ones(19))
    with pytest.raises(DegenerateInput):
        redundancy_mi(rng.standard_normal((8, 2)), np.ones(8))
