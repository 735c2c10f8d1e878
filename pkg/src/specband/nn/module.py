"""Parameter containers and the basic layers."""

from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import CheckpointError, ShapeMismatch
from ..tensor import Tensor, conv2d, conv3d, linear, reshape


class Module:
    """Base class: parameters and sub-modules are discovered from attributes.

    Discovery follows attribute assignment order, so parameter names and order are
    deterministic for a given construction sequence. Lists of modules are walked by index.
    """

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        seen = set()
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            for child_name, param in _walk(value, f"{prefix}{name}"):
                if param.id not in seen:
                    seen.add(param.id)
                    yield child_name, param

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def count_params(self) -> int:
        return count_params(self)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise CheckpointError(
                f"parameter names differ: missing={missing[:5]} unexpected={unexpected[:5]}"
            )
        for name, param in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise CheckpointError(f"{name}: shape {value.shape} != {param.shape}")
            param.data[...] = value


def _walk(value, name: str) -> Iterator[Tuple[str, Tensor]]:
    if isinstance(value, Tensor):
        if value.requires_grad:
            yield name, value
    elif isinstance(value, Module):
        yield from value.named_parameters(prefix=f"{name}.")
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            yield from _walk(item, f"{name}.{index}")


def count_params(module: Optional[Module]) -> int:
    """Exact number of scalar parameters (0 for no module)."""
    if module is None:
        return 0
    return int(sum(p.size for p in module.parameters()))


def _uniform(rng: np.random.Generator, shape: Sequence[int], fan_in: int) -> Tensor:
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return Tensor(rng.uniform(-bound, bound, size=tuple(shape)), requires_grad=True)


def _zeros(shape: Sequence[int]) -> Tensor:
    return Tensor(np.zeros(tuple(shape)), requires_grad=True)


class Linear(Module):
    """y = x·W + b with W stored in×out; accepts an n×in matrix or an in-vector."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, bias: bool = True):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = _uniform(rng, (in_features, out_features), in_features)
        self.bias = _zeros((out_features,)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_features:
            raise ShapeMismatch(f"Linear expects {self.in_features} features, got {x.shape}")
        if x.ndim == 1:
            return reshape(linear(reshape(x, (1, -1)), self.weight, self.bias), (self.out_features,))
        return linear(x, self.weight, self.bias)


class Conv2d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        padding: str = "same",
    ):
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = _uniform(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in)
        self.bias = _zeros((out_channels,))

    def forward(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, padding=self.padding)


class Conv3d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: Union[int, Tuple[int, int, int]],
        rng: np.random.Generator,
        padding: str = "same",
    ):
        if isinstance(kernel_size, int):
            kernel_size = (kernel_size,) * 3
        self.padding = padding
        fan_in = in_channels * int(np.prod(kernel_size))
        self.weight = _uniform(rng, (out_channels, in_channels) + tuple(kernel_size), fan_in)
        self.bias = _zeros((out_channels,))

    def forward(self, x: Tensor) -> Tensor:
        return conv3d(x, self.weight, self.bias, padding=self.padding)
