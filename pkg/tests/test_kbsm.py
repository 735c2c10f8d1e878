"""Tests for key band selection."""

import numpy as np
import pytest

from specband.errors import ConfigurationError, ShapeMismatch
from specband.nn import (
    BandSelection,
    KbsmParams,
    attention_map,
    gather_bands,
    kbsm_forward,
    kbsm_select,
    random_selection,
    retained_count,
    score_bands,
    select_topk,
)
from specband.tensor import Tensor, finite_diff_check
from specband.tensor import ops


def _zero_gate(params: KbsmParams) -> None:
    for layer in (params.gate_hidden, params.gate_out):
        layer.weight.data[...] = 0.0
        layer.bias.data[...] = 0.0


def test_attention_map_with_ones_guide(rng):
    """Test that a guide of ones gives per-band sums."""
    x = rng.standard_normal((9, 4))
    a = attention_map(Tensor(x), Tensor(np.ones((9, 1))))
    assert a.shape == (4, 1)
    assert np.allclose(a.data[:, 0], x.sum(axis=0))


def test_attention_map_orthogonal_bands():
    """Test that a guide equal to one orthogonal band lights up a single row."""
    x = np.eye(6)[:, :3]
    a = attention_map(Tensor(x), Tensor(x[:, [1]])).data
    assert np.count_nonzero(a) == 1
    assert a[1, 0] == 1.0


def test_attention_map_shape():
    """Test the c×k_f shape for an 11×11 patch with many bands."""
    a = attention_map(Tensor(np.zeros((121, 180))), Tensor(np.zeros((121, 64))))
    assert a.shape == (180, 64)
    with pytest.raises(ShapeMismatch):
        attention_map(Tensor(np.zeros((121, 180))), Tensor(np.zeros((100, 64))))


def test_zero_gate_gives_half(rng):
    """Test that zero MLP weights give g = 0.5 and v̂ = 0.5·v."""
    params = KbsmParams(positions=9, guide_width=3, rng=rng)
    _zero_gate(params)
    x = Tensor(rng.standard_normal((9, 5)))
    score = score_bands(attention_map(x, Tensor(rng.standard_normal((9, 3)))), x, params)
    assert np.allclose(score.g.data, 0.5)
    assert np.allclose(score.weighted.data, 0.5 * score.v.data)


def test_zero_aggregation_gives_bias(rng):
    """Test that zero aggregation weights leave v equal to the bias."""
    params = KbsmParams(positions=4, guide_width=2, rng=rng)
    params.aggregate.weight.data[...] = 0.0
    params.aggregate.bias.data[...] = 0.3
    x = Tensor(rng.standard_normal((4, 6)))
    score = score_bands(attention_map(x, Tensor(rng.standard_normal((4, 2)))), x, params)
    assert np.allclose(score.v.data, 0.3)


def test_topk_examples():
    """Test ordering, select-all and the lower-index tie rule."""
    assert select_topk([0.1, 0.9, 0.5], 2 / 3, 3).indices == [1, 2]
    assert select_topk([0.3, -1.0, 2.0, 0.0], 1.0, 4).indices == [0, 1, 2, 3]
    assert select_topk(np.full(5, 0.7), 0.6, 5).indices == [0, 1, 2]


def test_retained_count():
    """Test k = ceil(K·c) with rounding noise absorbed and the bounds enforced."""
    assert retained_count(0.5, 4) == 2
    assert retained_count(0.1, 30) == 3
    assert retained_count(0.2, 180) == 36
    assert retained_count(0.01, 5) == 1
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ConfigurationError):
            retained_count(bad, 10)


def test_selection_model_rejects_unsorted():
    """Test that a selection's indices must be strictly increasing and in range."""
    with pytest.raises(ValueError):
        BandSelection(k=2, indices=[3, 1], bands=5)
    with pytest.raises(ValueError):
        BandSelection(k=1, indices=[5], bands=5)


def test_gather_identity_and_single_column(rng):
    """Test selecting every band and a single band."""
    x = Tensor(rng.standard_normal((6, 4)))
    assert np.array_equal(gather_bands(x, [0, 1, 2, 3]).data, x.data)
    assert np.array_equal(gather_bands(x, [2]).data[:, 0], x.data[:, 2])


def test_gather_gradient_is_sparse(rng):
    """Test that d sum(Y)/dX is one on selected columns and zero elsewhere."""
    for _ in range(1000):
        hw, c = int(rng.integers(1, 6)), int(rng.integers(1, 8))
        picked = sorted(rng.choice(c, size=int(rng.integers(1, c + 1)), replace=False).tolist())
        x = Tensor(rng.standard_normal((hw, c)), requires_grad=True)
        error = finite_diff_check(lambda: ops.sum(gather_bands(x, picked)), [x])
        expected = np.zeros((hw, c))
        expected[:, picked] = 1.0
        assert np.array_equal(x.grad, expected)
        assert error <= 1e-7


def test_forward_shape_and_cardinality(rng):
    """Test c=4 with K=0.5: two bands kept, Y is hw×2."""
    params = KbsmParams(positions=9, guide_width=3, rng=rng)
    y, selection = kbsm_forward(
        Tensor(rng.standard_normal((9, 4))), Tensor(rng.standard_normal((9, 3))), params, 0.5
    )
    assert selection.k == 2
    assert y.shape == (9, 2)


def test_orthogonal_guide_and_zero_gate_tie():
    """Test that constant scores fall back to the lowest indices."""
    params = KbsmParams(positions=8, guide_width=2, rng=np.random.default_rng(0))
    _zero_gate(params)
    x = np.zeros((8, 4))
    x[:4] = np.arange(16).reshape(4, 4)
    z = np.zeros((8, 2))
    z[4:] = 1.0
    _, selection = kbsm_forward(Tensor(x), Tensor(z), params, 0.5)
    assert selection.indices == [0, 1]


def test_topk_invariant_under_monotone_transform(rng):
    """Test that α·v̂ + β (α > 0) selects the same bands."""
    for _ in range(1000):
        c = int(rng.integers(2, 40))
        ratio = float(rng.uniform(0.05, 1.0))
        v = rng.standard_normal(c)
        alpha, beta = rng.uniform(0.1, 10.0), rng.uniform(0.0, 5.0)
        base = select_topk(v, ratio, c)
        assert len(base.indices) == retained_count(ratio, c)
        assert select_topk(alpha * v + beta, ratio, c).indices == base.indices


def test_scores_are_permutation_equivariant(rng):
    """Test that permuting bands permutes scores, selection and gathered slices."""
    params = KbsmParams(positions=9, guide_width=3, rng=rng)
    z = Tensor(rng.standard_normal((9, 3)))
    for _ in range(1000):
        c = int(rng.integers(2, 16))
        ratio = float(rng.uniform(0.05, 1.0))
        perm = rng.permutation(c)
        x = rng.standard_normal((9, c))
        xp = x[:, perm]
        y, selection, score = kbsm_select(Tensor(x), z, params, ratio)
        y_p, selection_p, score_p = kbsm_select(Tensor(xp), z, params, ratio)
        assert np.allclose(score_p.numpy(), score.numpy()[perm], atol=1e-12)
        # band i of the permuted cube is band perm[i] of the original
        assert sorted(int(perm[i]) for i in selection_p.indices) == selection.indices
        columns = {tuple(col) for col in y.data.T}
        assert {tuple(col) for col in y_p.data.T} == columns
        assert len(columns) == selection.k


def test_random_selection_is_seeded():
    """Test the ablation selector: fixed size, sorted, reproducible."""
    a = random_selection(20, 0.25, seed=3)
    assert a.k == 5 and a.indices == sorted(a.indices)
    assert random_selection(20, 0.25, seed=3).indices == a.indices
