"""Single-head scaled dot-product cross attention."""

import math

import numpy as np

from ..errors import ShapeMismatch
from ..tensor import Tensor, add, global_avg_pool, matmul, mul, reshape, softmax, transpose
from .module import Conv2d, Linear, Module


class CrossAttention(Module):
    """softmax(Q·Kᵀ/√d)·V + Q over token matrices (tokens × features)."""

    def __init__(self, query_features: int, context_features: int, dim: int, rng: np.random.Generator):
        self.dim = dim
        self.query = Linear(query_features, dim, rng, bias=False)
        self.key = Linear(context_features, dim, rng, bias=False)
        self.value = Linear(context_features, dim, rng, bias=False)

    def forward(self, queries: Tensor, context: Tensor) -> Tensor:
        if queries.ndim != 2 or context.ndim != 2:
            raise ShapeMismatch(
                f"cross attention expects token matrices, got {queries.shape} and {context.shape}"
            )
        q = self.query(queries)
        k = self.key(context)
        v = self.value(context)
        scores = mul(matmul(q, transpose(k)), 1.0 / math.sqrt(self.dim))
        return add(matmul(softmax(scores, axis=1), v), q)


def to_tokens(feature_map: Tensor) -> Tensor:
    """C×p×p map → p²×C token matrix (row-major positions)."""
    channels = feature_map.shape[0]
    return transpose(reshape(feature_map, (channels, -1)))


def to_map(tokens: Tensor, p: int) -> Tensor:
    """p²×C token matrix → C×p×p map."""
    return reshape(transpose(tokens), (tokens.shape[1], p, p))


class CrossAttentionFusion(Module):
    """Two-source fusion without CAFM: aux tokens query HSI tokens."""

    def __init__(self, hsi_channels: int, aux_channels: int, width: int, rng: np.random.Generator):
        self.hsi_channels = hsi_channels
        self.aux_channels = aux_channels
        self.width = width
        self.hsi_project = Conv2d(hsi_channels, width, 1, rng)
        self.aux_project = Conv2d(aux_channels, width, 1, rng)
        self.attention = CrossAttention(width, width, width, rng)

    def forward(self, f_h: Tensor, f_x: Tensor) -> Tensor:
        if f_h.shape[0] != self.hsi_channels or f_x.shape[0] != self.aux_channels:
            raise ShapeMismatch(
                f"fusion expects {self.hsi_channels} and {self.aux_channels} channels, "
                f"got {f_h.shape} and {f_x.shape}"
            )
        p = f_h.shape[1]
        queries = to_tokens(self.aux_project(f_x))
        context = to_tokens(self.hsi_project(f_h))
        return to_map(self.attention(queries, context), p)


def attention_pool(attention: CrossAttention, queries: Tensor, context: Tensor) -> Tensor:
    """Attend, then average over query positions into one feature vector."""
    attended = attention(queries, context)
    return global_avg_pool(transpose(attended))
