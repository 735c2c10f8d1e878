"""Tests for the training loop and optimizers."""

from pathlib import Path

import numpy as np
import pytest

from specband.errors import ConfigurationError, DivergedLoss, InsufficientSamples
from specband.nn import RSCNet
from specband.tensor import Tensor
from specband.training import SGD, Adam, TrainConfig, evaluate, train, write_loss_csv
from specband.training.trainer import make_optimizer


@pytest.fixture
def small_model(small_data):
    return RSCNet(small_data.model_config(num_blocks=1, band_ratio=0.25, seed=0))


def test_zero_learning_rate_leaves_parameters(small_model, small_data):
    """Test that lr = 0 is a frozen run for both optimizers."""
    before = small_model.state_dict()
    for optimizer in ("adam", "sgd"):
        train(small_model, small_data.train.take(range(4)), TrainConfig(epochs=2, learning_rate=0.0, optimizer=optimizer))
    after = small_model.state_dict()
    assert all(np.array_equal(before[name], after[name]) for name in before)


def test_single_sample_is_memorized(small_model, small_data):
    """Test that one sample is fitted to near-zero loss."""
    # a short second-moment memory keeps Adam steps from shrinking with the gradient
    config = TrainConfig(epochs=400, learning_rate=0.02, betas=(0.9, 0.9))
    result = train(small_model, small_data.train.take([0]), config)
    assert result.steps == 400
    assert result.loss_curve[-1] < 1e-3


def test_small_set_reaches_full_train_accuracy(small_model, small_data):
    """Test memorizing ten samples gives OA = 1 on those samples."""
    subset = small_data.train.take(range(10))
    train(small_model, subset, TrainConfig(epochs=150, batch_size=10, learning_rate=0.02))
    assert evaluate(small_model, subset).oa == 1.0


def test_same_seed_same_curve(small_data):
    """Test that training is deterministic under fixed seeds."""
    subset = small_data.train.take(range(6))
    curves = []
    for _ in range(2):
        model = RSCNet(small_data.model_config(num_blocks=1, band_ratio=0.25, seed=4))
        curves.append(train(model, subset, TrainConfig(epochs=2, batch_size=4, seed=4)).loss_curve)
    assert curves[0] == curves[1]


def test_diverged_loss_carries_state(small_model, small_data):
    """Test that a non-finite forward pass raises DivergedLoss with a state snapshot."""
    small_model.classifier_out.bias.data[...] = np.inf
    with pytest.raises(DivergedLoss) as info:
        train(small_model, small_data.train.take(range(4)), TrainConfig(epochs=1))
    assert info.value.epoch == 1 and info.value.step == 0
    assert set(info.value.state) == set(small_model.state_dict())
    assert info.value.exit_code == 4


def test_empty_training_set(small_model, small_data):
    """Test that an empty training set is rejected."""
    with pytest.raises(InsufficientSamples):
        train(small_model, small_data.train.take([]), TrainConfig(epochs=1))


def test_train_config_ranges():
    """Test defaults and rejected epochs, batch sizes, learning rates and betas."""
    with pytest.raises(ConfigurationError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(ConfigurationError):
        TrainConfig(betas=(0.9, 1.0))
    assert TrainConfig(learning_rate=0.0).learning_rate == 0.0
    config = TrainConfig()
    assert (config.epochs, config.batch_size, config.learning_rate) == (20, 8, 5e-3)
    assert config.betas == (0.9, 0.999)


def test_optimizer_steps():
    """Test one SGD step and one Adam step on a known gradient."""
    p = Tensor([1.0, -2.0], requires_grad=True)
    p.grad = np.array([0.5, -1.0])
    SGD([p], lr=0.1).step()
    assert np.allclose(p.data, [0.95, -1.9])

    q = Tensor([0.0], requires_grad=True)
    q.grad = np.array([3.0])
    Adam([q], lr=0.01).step()
    assert np.allclose(q.data, [-0.01], atol=1e-6)


def test_loss_csv(temp_dir):
    """Test the epoch,mean_loss layout."""
    path = Path(temp_dir) / "loss.csv"
    write_loss_csv([1.5, 0.25], path)
    assert path.read_text().splitlines() == ["epoch,mean_loss", "1,1.5", "2,0.25"]


def test_adam_uses_configured_betas(small_model):
    """Test that TrainConfig.betas reach the Adam optimizer."""
    optimizer = make_optimizer(small_model, TrainConfig(betas=(0.8, 0.95)))
    assert isinstance(optimizer, Adam)
    assert (optimizer.beta1, optimizer.beta2) == (0.8, 0.95)
