"""Key band selection: cross-source attention scores, sparse gating and top-k gather.

X (hw×c) holds one column per physical band; Z (hw×k_f) is the guiding fused feature.
A = XᵀZ scores each band against the guide, a shared linear map turns each row of A
into a scalar v[i], and a gating MLP shared across bands turns each band's spatial
column into g[i] in (0, 1). Bands are ranked by v̂ = v ⊙ g.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..errors import ConfigurationError, ShapeMismatch
from ..tensor import Tensor, gather, gelu, matmul, mul, reshape, sigmoid, transpose
from .module import Linear, Module


class KbsmParams(Module):
    """Aggregation map k_f→1 over rows of A and the per-band gating MLP hw→h→1."""

    def __init__(self, positions: int, guide_width: int, rng: np.random.Generator):
        self.positions = positions
        self.guide_width = guide_width
        self.aggregate = Linear(guide_width, 1, rng)
        hidden = max(8, positions // 4)
        self.gate_hidden = Linear(positions, hidden, rng)
        self.gate_out = Linear(hidden, 1, rng)


@dataclass
class BandScore:
    """v: attention vector, g: gate in (0, 1), weighted: v ⊙ g (all length c)."""
    v: Tensor
    g: Tensor
    weighted: Tensor

    def numpy(self) -> np.ndarray:
        return self.weighted.numpy()


class BandSelection(BaseModel):
    """Retained band indices, strictly increasing, plus the scores they were ranked by."""
    k: int = Field(..., ge=1)
    indices: List[int]
    scores: List[float] = Field(default_factory=list)
    ratio: float = Field(1.0, gt=0, le=1)
    bands: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_indices(self):
        if len(self.indices) != self.k:
            raise ValueError(f"{len(self.indices)} indices for k={self.k}")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if self.indices and not (0 <= self.indices[0] and self.indices[-1] < self.bands):
            raise ValueError(f"indices must lie in [0, {self.bands})")
        return self


def retained_count(ratio: float, bands: int) -> int:
    """k = ceil(K·c), clamped to [1, c]."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigurationError(f"band ratio {ratio} outside (0, 1]")
    # Rounding first keeps ratios like 0.1 * 30 at exactly 3.
    k = math.ceil(round(ratio * bands, 9))
    return min(max(k, 1), bands)


def attention_map(x: Tensor, z: Tensor) -> Tensor:
    """A = Xᵀ·Z, c×k_f."""
    if x.ndim != 2 or z.ndim != 2 or x.shape[0] != z.shape[0]:
        raise ShapeMismatch(f"attention_map needs hw×c and hw×k_f, got {x.shape} and {z.shape}")
    return matmul(transpose(x), z)


def score_bands(a: Tensor, x: Tensor, params: KbsmParams) -> BandScore:
    """v = Linear(A) row-wise, g = sigmoid(MLP(Xᵀ)) column-wise, weighted = v ⊙ g."""
    if a.ndim != 2 or a.shape[1] != params.guide_width:
        raise ShapeMismatch(f"attention map {a.shape} does not match guide width {params.guide_width}")
    if x.ndim != 2 or x.shape[0] != params.positions or x.shape[1] != a.shape[0]:
        raise ShapeMismatch(
            f"band features {x.shape} inconsistent with {params.positions} positions and {a.shape[0]} bands"
        )
    bands = a.shape[0]
    v = reshape(params.aggregate(a), (bands,))
    gate_logits = params.gate_out(gelu(params.gate_hidden(transpose(x))))
    g = sigmoid(reshape(gate_logits, (bands,)))
    return BandScore(v=v, g=g, weighted=mul(v, g))


def select_topk(score: Union[BandScore, np.ndarray, Sequence[float]], ratio: float, bands: int) -> BandSelection:
    """Indices of the ceil(K·c) largest weighted scores, ties to the lower index, ascending."""
    values = score.numpy() if isinstance(score, BandScore) else np.asarray(score, dtype=np.float64)
    if values.shape != (bands,):
        raise ShapeMismatch(f"expected {bands} scores, got shape {values.shape}")
    k = retained_count(ratio, bands)
    order = np.lexsort((np.arange(bands), -values))
    chosen = np.sort(order[:k])
    return BandSelection(
        k=k,
        indices=[int(i) for i in chosen],
        scores=[float(s) for s in values],
        ratio=ratio,
        bands=bands,
    )


def random_selection(bands: int, ratio: float, seed: int) -> BandSelection:
    """Fixed seeded subset of ceil(K·c) bands, used when KBSM is ablated."""
    k = retained_count(ratio, bands)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(bands, size=k, replace=False))
    return BandSelection(k=k, indices=[int(i) for i in chosen], ratio=ratio, bands=bands)


def gather_bands(x: Tensor, selection: Union[BandSelection, Sequence[int]]) -> Tensor:
    """Columns of X at the selected indices, in selection order."""
    indices = selection.indices if isinstance(selection, BandSelection) else list(selection)
    if x.ndim != 2:
        raise ShapeMismatch(f"gather_bands expects an hw×c matrix, got {x.shape}")
    return gather(x, indices, axis=1)


def kbsm_select(
    x: Tensor, z: Tensor, params: KbsmParams, ratio: float
) -> Tuple[Tensor, BandSelection, BandScore]:
    """Gathered bands, the selection, and the scores behind it."""
    score = score_bands(attention_map(x, z), x, params)
    selection = select_topk(score, ratio, x.shape[1])
    return gather_bands(x, selection), selection, score


def kbsm_forward(x: Tensor, z: Tensor, params: KbsmParams, ratio: float) -> Tuple[Tensor, BandSelection]:
    y, selection, _ = kbsm_select(x, z, params, ratio)
    return y, selection
