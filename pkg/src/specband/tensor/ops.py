"""Differentiable tensor operations.

Every op returns a new Tensor and, when gradients are tracked, a closure mapping the
output gradient to one gradient per input (None where an input needs none).
"""

import math
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import IndexOutOfRange, ShapeMismatch
from .core import Tensor

TensorLike = Union[Tensor, np.ndarray, float, int]

_GELU_C = math.sqrt(2.0 / math.pi)


def as_tensor(value: TensorLike) -> Tensor:
    """Wrap constants; tensors pass through untouched."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}") from None


# Elementwise arithmetic

def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor._from_op(a.data + b.data, (a, b), "add", backward)


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor._from_op(a.data - b.data, (a, b), "sub", backward)


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor._from_op(a.data * b.data, (a, b), "mul", backward)


def div(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "div")
    out = a.data / b.data

    def backward(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * out / b.data, b.shape),
        )

    return Tensor._from_op(out, (a, b), "div", backward)


def neg(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    return Tensor._from_op(-a.data, (a,), "neg", lambda g: (-g,))


def exp(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    return Tensor._from_op(out, (a,), "exp", lambda g: (g * out,))


def detach(a: Tensor) -> Tensor:
    return a.detach()


# Linear algebra

def matmul(a: TensorLike, b: TensorLike) -> Tensor:
    """Matrix product of two 2-D tensors: c[i][j] = sum_k a[i][k] * b[k][j]."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatch(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul inner dimensions differ: {a.shape} x {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return Tensor._from_op(a.data @ b.data, (a, b), "matmul", backward)


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x[..., in] @ weight[in, out] + bias[out]."""
    out = matmul(x, weight)
    if bias is not None:
        out = add(out, bias)
    return out


# Shape manipulation

def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeMismatch(f"cannot reshape {a.shape} into {tuple(shape)}") from None
    return Tensor._from_op(out, (a,), "reshape", lambda g: (g.reshape(a.shape),))


def transpose(a: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return Tensor._from_op(
        np.transpose(a.data, axes), (a,), "transpose", lambda g: (np.transpose(g, inverse),)
    )


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeMismatch("concat needs at least one tensor")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat: {e}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor._from_op(out, tensors, "concat", backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"stack: {e}") from None

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._from_op(out, tensors, "stack", backward)


def gather(a: Tensor, indices: Sequence[int], axis: int = -1) -> Tensor:
    """Select entries along one axis; gradients flow back only to selected positions."""
    a = as_tensor(a)
    index = np.asarray(indices, dtype=np.int64)
    size = a.shape[axis]
    if index.ndim != 1:
        raise IndexOutOfRange("gather indices must be one-dimensional")
    if index.size and (index.min() < 0 or index.max() >= size):
        raise IndexOutOfRange(f"gather index outside [0, {size})")
    out = np.take(a.data, index, axis=axis)

    def backward(g):
        full = np.zeros_like(a.data)
        moved = np.moveaxis(full, axis, 0)
        np.add.at(moved, index, np.moveaxis(g, axis, 0))
        return (full,)

    return Tensor._from_op(out, (a,), "gather", backward)


# Reductions

def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return Tensor._from_op(out, (a,), "sum", backward)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return mul(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def global_avg_pool(x: Tensor) -> Tensor:
    """Spatial mean per channel: C×H×W (or C×D×H×W) -> C."""
    if x.ndim < 2:
        raise ShapeMismatch(f"global_avg_pool expects a channel-first map, got {x.shape}")
    return mean(x, axis=tuple(range(1, x.ndim)))


# Activations

def relu(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return Tensor._from_op(a.data * mask, (a,), "relu", lambda g: (g * mask,))


def sigmoid(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    z = np.exp(-np.abs(a.data))
    out = np.where(a.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return Tensor._from_op(out, (a,), "sigmoid", lambda g: (g * out * (1.0 - out),))


def gelu(a: TensorLike) -> Tensor:
    """GELU, tanh form."""
    a = as_tensor(a)
    x = a.data
    inner = _GELU_C * (x + 0.044715 * x ** 3)
    t = np.tanh(inner)
    out = 0.5 * x * (1.0 + t)

    def backward(g):
        d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * d_inner),)

    return Tensor._from_op(out, (a,), "gelu", backward)


def softmax(a: TensorLike, axis: int = -1) -> Tensor:
    """Softmax along an axis, computed with max subtraction."""
    a = as_tensor(a)
    if not -a.ndim <= axis < a.ndim:
        raise ShapeMismatch(f"softmax axis {axis} invalid for shape {a.shape}")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return Tensor._from_op(out, (a,), "softmax", backward)


def log_softmax(a: TensorLike, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def backward(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return Tensor._from_op(out, (a,), "log_softmax", backward)


def cross_entropy(logits: Tensor, targets: Sequence[int]) -> Tensor:
    """Mean softmax cross-entropy of B×C logits against 0-based class ids."""
    if logits.ndim != 2:
        raise ShapeMismatch(f"cross_entropy expects B×C logits, got {logits.shape}")
    target = np.asarray(targets, dtype=np.int64)
    if target.shape != (logits.shape[0],):
        raise ShapeMismatch(
            f"cross_entropy: {target.shape[0] if target.ndim else 0} targets for {logits.shape[0]} rows"
        )
    if target.size and (target.min() < 0 or target.max() >= logits.shape[1]):
        raise IndexOutOfRange(f"cross_entropy target outside [0, {logits.shape[1]})")
    log_probs = log_softmax(logits, axis=1)
    picked = log_probs.data[np.arange(target.size), target]
    batch = target.size

    def backward(g):
        full = np.zeros_like(log_probs.data)
        full[np.arange(batch), target] = -float(g) / batch
        return (full,)

    return Tensor._from_op(np.array(-picked.mean()), (log_probs,), "nll", backward)
