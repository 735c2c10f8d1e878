"""Tests for cross-source adaptive fusion."""

import numpy as np
import pytest

from specband.commands.gradcheck import GRADCHECK_TOLERANCE
from specband.errors import ShapeMismatch
from specband.nn import CafmParams, cafm_forward, combine_sources, cross_source_weighting, local_global_refine
from specband.nn.cafm import SourceDescriptor
from specband.tensor import Tensor, finite_diff_check
from specband.tensor import ops


@pytest.fixture
def params():
    return CafmParams(hsi_channels=3, aux_channels=2, width=4, rng=np.random.default_rng(7))


def test_equal_logits_average_sources(params, rng):
    """Test that identical source logits weight both projections by 0.5."""
    for layer in (params.descriptor.squeeze, params.descriptor.expand):
        layer.weight.data[...] = 0.0
        layer.bias.data[...] = 0.0
    f_h = Tensor(rng.standard_normal((4, 5, 5)))
    f_x = Tensor(rng.standard_normal((4, 5, 5)))
    f_mid, weights = combine_sources(f_h, f_x, params.descriptor)
    assert np.allclose(weights.w_h.data, 0.5)
    assert np.allclose(weights.w_x.data, 0.5)
    assert np.allclose(f_mid.data, (f_h.data + f_x.data) / 2)


def test_source_weights_sum_to_one(params, rng):
    """Test w_h + w_x = 1 per channel for random inputs."""
    f_mid, weights = cross_source_weighting(
        Tensor(rng.standard_normal((3, 5, 5))), Tensor(rng.standard_normal((2, 5, 5))), params
    )
    assert f_mid.shape == (4, 5, 5)
    assert np.allclose(weights.w_h.data + weights.w_x.data, 1.0)
    assert np.all(weights.w_h.data > 0) and np.all(weights.w_x.data > 0)


def test_zero_aux_branch_contributes_nothing(params, rng):
    """Test that a zero projected aux source leaves F_mid = w_h ⊙ F_h'."""
    f_h = Tensor(rng.standard_normal((4, 3, 3)))
    f_mid, weights = combine_sources(f_h, Tensor(np.zeros((4, 3, 3))), params.descriptor)
    assert np.allclose(f_mid.data, weights.w_h.data[:, None, None] * f_h.data)


def test_uniform_mask_scales_input(params, rng):
    """Test that equal attention logits give F_fus = (1 + 1/w)·F_mid."""
    params.local_attention.weight.data[...] = 0.0
    params.local_attention.bias.data[...] = 0.0
    f_mid = Tensor(rng.standard_normal((4, 5, 5)))
    out = local_global_refine(f_mid, params)
    assert np.allclose(out.data, (1 + 1 / 4) * f_mid.data)


def test_zero_input_propagates(params):
    """Test F_mid = 0 gives F_fus = 0."""
    out = local_global_refine(Tensor(np.zeros((4, 5, 5))), params)
    assert np.array_equal(out.data, np.zeros((4, 5, 5)))


def test_full_fusion_shape_and_errors(params, rng):
    """Test the output shape and rejected inputs."""
    out = cafm_forward(Tensor(rng.standard_normal((3, 5, 5))), Tensor(rng.standard_normal((2, 5, 5))), params)
    assert out.shape == (4, 5, 5)
    with pytest.raises(ShapeMismatch):
        cafm_forward(Tensor(np.zeros((2, 5, 5))), Tensor(np.zeros((2, 5, 5))), params)
    with pytest.raises(ShapeMismatch):
        cafm_forward(Tensor(np.zeros((3, 5, 5))), Tensor(np.zeros((2, 4, 4))), params)
    with pytest.raises(ShapeMismatch):
        local_global_refine(Tensor(np.zeros((3, 5, 5))), params)


def _weighted_sum(out: Tensor, seed: int):
    weights = Tensor(np.random.default_rng(seed).standard_normal(out.shape))
    return ops.sum(ops.mul(out, weights))


@pytest.fixture
def small_params():
    return CafmParams(hsi_channels=2, aux_channels=2, width=2, rng=np.random.default_rng(3))


def test_refinement_gradient_matches_finite_differences(small_params, rng):
    """Test local_global_refine on a 2-channel 3×3 map against central differences."""
    f_mid = Tensor(rng.standard_normal((2, 3, 3)), requires_grad=True)
    leaves = [f_mid, *small_params.parameters()]
    f = lambda: _weighted_sum(local_global_refine(f_mid, small_params), 0)
    assert finite_diff_check(f, leaves) <= GRADCHECK_TOLERANCE


def test_fusion_gradient_matches_finite_differences(small_params, rng):
    """Test the full two-stage fusion on 2-channel 3×3 inputs against central differences."""
    f_h = Tensor(rng.standard_normal((2, 3, 3)), requires_grad=True)
    f_x = Tensor(rng.standard_normal((2, 3, 3)), requires_grad=True)
    leaves = [f_h, f_x, *small_params.parameters()]
    f = lambda: _weighted_sum(cafm_forward(f_h, f_x, small_params), 1)
    assert finite_diff_check(f, leaves) <= GRADCHECK_TOLERANCE


def test_both_sources_receive_gradient():
    """Test over ten random instances that neither source branch is dead."""
    for seed in range(10):
        rng = np.random.default_rng(seed)
        params = CafmParams(hsi_channels=3, aux_channels=2, width=4, rng=rng)
        f_h = Tensor(rng.standard_normal((3, 5, 5)), requires_grad=True)
        f_x = Tensor(rng.standard_normal((2, 5, 5)), requires_grad=True)
        _weighted_sum(cafm_forward(f_h, f_x, params), seed).backward()
        assert np.abs(f_h.grad).max() > 0
        assert np.abs(f_x.grad).max() > 0
        for name, p in params.named_parameters():
            assert p.grad is not None and np.abs(p.grad).max() > 0, name


def test_swapping_sources_swaps_weights(params, rng):
    """Test that swapped inputs with a mirrored descriptor swap w_h and w_x and keep F_mid."""
    width = params.width
    mirrored = SourceDescriptor(width, np.random.default_rng(0))
    halves = np.r_[width:2 * width, 0:width]
    mirrored.squeeze.weight.data[...] = params.descriptor.squeeze.weight.data[halves]
    mirrored.squeeze.bias.data[...] = params.descriptor.squeeze.bias.data
    mirrored.expand.weight.data[...] = params.descriptor.expand.weight.data[:, halves]
    mirrored.expand.bias.data[...] = params.descriptor.expand.bias.data[halves]

    f_h = Tensor(rng.standard_normal((width, 5, 5)))
    f_x = Tensor(rng.standard_normal((width, 5, 5)))
    f_mid, weights = combine_sources(f_h, f_x, params.descriptor)
    swapped_mid, swapped = combine_sources(f_x, f_h, mirrored)
    assert np.allclose(swapped.w_h.data, weights.w_x.data, atol=1e-12)
    assert np.allclose(swapped.w_x.data, weights.w_h.data, atol=1e-12)
    assert np.allclose(swapped_mid.data, f_mid.data, atol=1e-12)
