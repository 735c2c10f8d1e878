"""2-D and 3-D cross-correlation (no kernel flip) with zero `same` padding."""

import itertools
from typing import Literal, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatch
from .core import Tensor
from .ops import as_tensor

Padding = Literal["same", "valid"]


def _conv_nd(
    x: Tensor,
    kernels: Tensor,
    bias: Optional[Tensor],
    padding: Padding,
    nd: int,
) -> Tensor:
    x, kernels = as_tensor(x), as_tensor(kernels)
    name = f"conv{nd}d"
    if x.ndim != nd + 1:
        raise ShapeMismatch(f"{name} expects a C_in×{'×'.join('DHW'[-nd:])} input, got {x.shape}")
    if kernels.ndim != nd + 2:
        raise ShapeMismatch(f"{name} expects C_out×C_in×k kernels, got {kernels.shape}")
    if kernels.shape[1] != x.shape[0]:
        raise ShapeMismatch(
            f"{name}: kernels expect {kernels.shape[1]} input channels, input has {x.shape[0]}"
        )
    c_out = kernels.shape[0]
    ksize = kernels.shape[2:]
    spatial = x.shape[1:]
    if bias is not None and bias.shape != (c_out,):
        raise ShapeMismatch(f"{name}: bias shape {bias.shape} != ({c_out},)")

    if padding == "same":
        if any(k % 2 == 0 for k in ksize):
            raise ShapeMismatch(f"{name}: 'same' padding needs odd kernel sizes, got {ksize}")
        pads = [(0, 0)] + [(k // 2, k // 2) for k in ksize]
        padded = np.pad(x.data, pads)
    elif padding == "valid":
        if any(k > s for k, s in zip(ksize, spatial)):
            raise ShapeMismatch(f"{name}: kernel {ksize} larger than input {spatial}")
        padded = x.data
    else:
        raise ShapeMismatch(f"{name}: unknown padding '{padding}'")

    spatial_axes = tuple(range(1, nd + 1))
    windows = sliding_window_view(padded, ksize, axis=spatial_axes)
    out_spatial = windows.shape[1:nd + 1]

    # windows: C_in × O... × K...; kernels: C_out × C_in × K...
    window_axes = [0] + list(range(nd + 1, 2 * nd + 1))
    kernel_axes = [1] + list(range(2, nd + 2))
    out = np.tensordot(windows, kernels.data, axes=(window_axes, kernel_axes))
    out = np.moveaxis(out, -1, 0)
    if bias is not None:
        out = out + bias.data.reshape((c_out,) + (1,) * nd)

    def backward(g):
        d_kernels = np.tensordot(g, windows, axes=(list(range(1, nd + 1)), list(range(1, nd + 1))))
        d_padded = np.zeros_like(padded)
        for offset in itertools.product(*(range(k) for k in ksize)):
            region = (slice(None),) + tuple(
                slice(o, o + n) for o, n in zip(offset, out_spatial)
            )
            tap = kernels.data[(slice(None), slice(None)) + offset]
            d_padded[region] += np.tensordot(tap, g, axes=([0], [0]))
        if padding == "same":
            crop = (slice(None),) + tuple(slice(k // 2, k // 2 + s) for k, s in zip(ksize, spatial))
            d_x = d_padded[crop]
        else:
            d_x = d_padded
        grads = [d_x, d_kernels]
        if bias is not None:
            grads.append(g.sum(axis=tuple(range(1, nd + 1))))
        return tuple(grads)

    parents = (x, kernels) if bias is None else (x, kernels, bias)
    return Tensor._from_op(out, parents, name, backward)


def conv2d(
    x: Tensor,
    kernels: Tensor,
    bias: Optional[Tensor] = None,
    padding: Padding = "same",
) -> Tensor:
    """C_in×H×W input, C_out×C_in×kh×kw kernels -> C_out×H'×W'."""
    return _conv_nd(x, kernels, bias, padding, nd=2)


def conv3d(
    x: Tensor,
    kernels: Tensor,
    bias: Optional[Tensor] = None,
    padding: Padding = "same",
) -> Tensor:
    """C_in×D×H×W input, C_out×C_in×kd×kh×kw kernels -> C_out×D'×H'×W'."""
    return _conv_nd(x, kernels, bias, padding, nd=3)
