"""Cross-source adaptive fusion.

Stage 1 projects both sources to a common width, derives per-channel source weights
from their pooled descriptors (softmax across the two sources) and sums the weighted
projections. Stage 2 refines the result with a channel softmax over the product of a
local (3×3 conv) and a global (pooled, linear) attention branch, added back residually.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ShapeMismatch
from ..tensor import (
    Tensor,
    add,
    concat,
    gather,
    gelu,
    global_avg_pool,
    mul,
    reshape,
    softmax,
)
from .module import Conv2d, Conv3d, Linear, Module


class SourceDescriptor(Module):
    """Pooled 2w descriptor → two layers → 2×w source logits."""

    def __init__(self, width: int, rng: np.random.Generator):
        self.width = width
        self.squeeze = Linear(2 * width, width, rng)
        self.expand = Linear(width, 2 * width, rng)

    def forward(self, pooled: Tensor) -> Tensor:
        logits = self.expand(gelu(self.squeeze(pooled)))
        return reshape(logits, (2, self.width))


class CafmParams(Module):
    def __init__(self, hsi_channels: int, aux_channels: int, width: int, rng: np.random.Generator):
        self.hsi_channels = hsi_channels
        self.aux_channels = aux_channels
        self.width = width
        # HSI branch: band axis as depth, then flattened depth → channels.
        self.hsi_volume = Conv3d(1, 1, 3, rng)
        self.hsi_project = Conv2d(hsi_channels, width, 1, rng)
        self.aux_project = Conv2d(aux_channels, width, 3, rng)
        self.descriptor = SourceDescriptor(width, rng)
        self.context = Conv2d(width, width, 3, rng)
        self.local_attention = Conv2d(width, width, 3, rng)
        self.global_attention = Linear(width, width, rng)


@dataclass
class SourceWeights:
    """Per-channel weights of the two sources; w_h + w_x = 1."""
    w_h: Tensor
    w_x: Tensor


def project_hsi(f_h: Tensor, params: CafmParams) -> Tensor:
    channels, p, q = f_h.shape
    volume = params.hsi_volume(reshape(f_h, (1, channels, p, q)))
    return params.hsi_project(reshape(volume, (channels, p, q)))


def project_aux(f_x: Tensor, params: CafmParams) -> Tensor:
    return params.aux_project(f_x)


def combine_sources(
    f_h: Tensor, f_x: Tensor, descriptor: SourceDescriptor
) -> Tuple[Tensor, SourceWeights]:
    """Weight two projected width×p×p maps by softmax-over-sources and sum them."""
    if f_h.shape != f_x.shape:
        raise ShapeMismatch(f"projected sources differ: {f_h.shape} vs {f_x.shape}")
    width = f_h.shape[0]
    pooled = global_avg_pool(concat([f_h, f_x], axis=0))
    weights = softmax(descriptor(pooled), axis=0)
    w_h = reshape(gather(weights, [0], axis=0), (width,))
    w_x = reshape(gather(weights, [1], axis=0), (width,))
    f_mid = add(
        mul(reshape(w_h, (width, 1, 1)), f_h),
        mul(reshape(w_x, (width, 1, 1)), f_x),
    )
    return f_mid, SourceWeights(w_h=w_h, w_x=w_x)


def cross_source_weighting(
    f_h: Tensor, f_x: Tensor, params: CafmParams
) -> Tuple[Tensor, SourceWeights]:
    """Project both sources to the common width and fuse them by learned source weights."""
    _check_inputs(f_h, f_x, params)
    return combine_sources(project_hsi(f_h, params), project_aux(f_x, params), params.descriptor)


def local_global_refine(f_mid: Tensor, params: CafmParams) -> Tensor:
    """F_fus = softmax_channels(L ⊙ G) ⊙ F_mid + F_mid."""
    if f_mid.ndim != 3 or f_mid.shape[0] != params.width:
        raise ShapeMismatch(f"refinement expects {params.width}×p×p, got {f_mid.shape}")
    context = gelu(params.context(f_mid))
    local = params.local_attention(context)
    glob = reshape(params.global_attention(global_avg_pool(context)), (params.width, 1, 1))
    mask = softmax(mul(local, glob), axis=0)
    return add(mul(mask, f_mid), f_mid)


def cafm_forward(f_h: Tensor, f_x: Tensor, params: CafmParams) -> Tensor:
    f_mid, _ = cross_source_weighting(f_h, f_x, params)
    return local_global_refine(f_mid, params)


def _check_inputs(f_h: Tensor, f_x: Tensor, params: CafmParams) -> None:
    if f_h.ndim != 3 or f_h.shape[0] != params.hsi_channels:
        raise ShapeMismatch(f"HSI input must be {params.hsi_channels}×p×p, got {f_h.shape}")
    if f_x.ndim != 3 or f_x.shape[0] != params.aux_channels:
        raise ShapeMismatch(f"aux input must be {params.aux_channels}×p×p, got {f_x.shape}")
    if f_h.shape[1:] != f_x.shape[1:]:
        raise ShapeMismatch(f"sources disagree spatially: {f_h.shape} vs {f_x.shape}")
