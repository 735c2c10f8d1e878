"""RSCNet assembly: encoders, stem fusion, stacked refinement blocks and the head.

Data flow for one sample (p×p patch, hw = p²):

    hsi (c×p×p)      → HSI encoder (pointwise over bands)   → F_h   hw×c
    reduced (r×p×p)  → spatial encoder                      → F_r   w×p×p
    aux (c_aux×p×p)  → spatial encoder                      → F_x   w×p×p
    F_fus = fuse(F_r, F_x)
    repeat N times:
        Y, s = KBSM(F_h, F_fus)            selected bands, hw×k
        F_h' = Y ⊙ sigmoid(v̂[s])           score coupling (switchable)
        F_fus = fuse(F_h', FFN(F_fus))
    embedding = mean_positions(CrossAttention(Q=F_fus, K=V=F_h'))
    logits = MLP(embedding)
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Literal, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, Field, model_validator

from ..errors import ConfigurationError, EvenPatchSize, ShapeMismatch
from ..tensor import Tensor, gather, gelu, mul, no_grad, reshape, sigmoid, stack, transpose
from .attention import CrossAttention, CrossAttentionFusion, attention_pool, to_map, to_tokens
from .cafm import CafmParams, cafm_forward
from .kbsm import (
    BandScore,
    BandSelection,
    KbsmParams,
    gather_bands,
    kbsm_select,
    random_selection,
    retained_count,
)
from .module import Conv2d, Conv3d, Linear, Module

logger = structlog.get_logger(__name__)

ArrayLike = Union[np.ndarray, Tensor]


class Stream(str, Enum):
    HSI = "hsi"
    REDUCED = "reduced"
    AUX = "aux"


class ModelConfig(BaseModel):
    """Architecture hyperparameters and ablation switches."""

    bands: int = Field(..., ge=1, description="HSI band count c")
    aux_bands: int = Field(..., ge=1, description="Auxiliary channel count")
    num_classes: int = Field(..., ge=2)
    patch_size: int = 11
    band_ratio: float = 0.2
    num_blocks: int = 4
    reduced_bands: Optional[int] = None
    encoder_width: Optional[int] = None
    hsi_hidden: int = Field(4, ge=1)
    seed: int = 0
    band_selector: Literal["kbsm", "random"] = "kbsm"
    fusion: Literal["cafm", "cross_attention"] = "cafm"
    sources: Literal["both", "hsi", "aux"] = "both"
    use_pca: bool = True
    share_block_params: bool = False
    freeze_selection: bool = False
    score_coupling: bool = True

    @model_validator(mode="before")
    @classmethod
    def _check_ranges(cls, data):
        if not isinstance(data, dict):
            return data
        p = data.get("patch_size", 11)
        if int(p) < 1 or int(p) % 2 == 0:
            raise EvenPatchSize(f"patch_size must be odd and >= 1, got {p}")
        ratio = float(data.get("band_ratio", 0.2))
        if not 0.0 < ratio <= 1.0:
            raise ConfigurationError(f"band_ratio {ratio} outside (0, 1]")
        blocks = int(data.get("num_blocks", 4))
        if blocks < 1:
            raise ConfigurationError(f"num_blocks must be >= 1, got {blocks}")
        bands = data.get("bands")
        reduced = data.get("reduced_bands")
        if reduced is not None and bands is not None and not 1 <= int(reduced) <= int(bands):
            raise ConfigurationError(f"reduced_bands {reduced} outside [1, {bands}]")
        width = data.get("encoder_width")
        if width is not None and int(width) < 1:
            raise ConfigurationError(f"encoder_width must be >= 1, got {width}")
        return data

    @model_validator(mode="after")
    def _resolve_widths(self):
        if self.reduced_bands is None:
            self.reduced_bands = min(self.aux_bands, self.bands)
        if self.encoder_width is None:
            self.encoder_width = self.reduced_bands
        return self

    @property
    def positions(self) -> int:
        return self.patch_size * self.patch_size

    @property
    def selected_bands(self) -> int:
        return retained_count(self.band_ratio, self.bands)

    @property
    def reduced_input_bands(self) -> int:
        return self.reduced_bands if self.use_pca else self.bands


class HsiEncoder(Module):
    """Two pointwise conv3d + GELU stages with the band axis as depth."""

    def __init__(self, hidden: int, rng: np.random.Generator):
        self.expand = Conv3d(1, hidden, 1, rng)
        self.merge = Conv3d(hidden, 1, 1, rng)

    def forward(self, patch: Tensor) -> Tensor:
        bands, p, q = patch.shape
        volume = reshape(patch, (1, bands, p, q))
        volume = gelu(self.merge(gelu(self.expand(volume))))
        return transpose(reshape(volume, (bands, p * q)))


class SpatialEncoder(Module):
    """Two 3×3 conv2d + GELU stages."""

    def __init__(self, in_channels: int, width: int, rng: np.random.Generator):
        self.first = Conv2d(in_channels, width, 3, rng)
        self.second = Conv2d(width, width, 3, rng)

    def forward(self, patch: Tensor) -> Tensor:
        return gelu(self.second(gelu(self.first(patch))))


class FeedForward(Module):
    def __init__(self, width: int, rng: np.random.Generator):
        self.hidden = Linear(width, 2 * width, rng)
        self.out = Linear(2 * width, width, rng)

    def forward(self, tokens: Tensor) -> Tensor:
        return self.out(gelu(self.hidden(tokens)))


class Fusion(Module):
    """Two-source fusion: CAFM or the plain cross-attention replacement."""

    def __init__(self, kind: str, hsi_channels: int, aux_channels: int, width: int, rng: np.random.Generator):
        self.kind = kind
        if kind == "cafm":
            self.cafm = CafmParams(hsi_channels, aux_channels, width, rng)
        else:
            self.cross = CrossAttentionFusion(hsi_channels, aux_channels, width, rng)

    def forward(self, f_h: Tensor, f_x: Tensor) -> Tensor:
        if self.kind == "cafm":
            return cafm_forward(f_h, f_x, self.cafm)
        return self.cross(f_h, f_x)


class RscBlock(Module):
    def __init__(self, config: ModelConfig, with_kbsm: bool, rng: np.random.Generator):
        width = config.encoder_width
        self.kbsm = KbsmParams(config.positions, width, rng) if with_kbsm else None
        self.ffn = FeedForward(width, rng)
        self.fusion = Fusion(config.fusion, config.selected_bands, width, width, rng)


@dataclass
class BlockOutput:
    fused: Tensor
    selected: Tensor
    selection: BandSelection
    score: Optional[BandScore] = None


def rscb_forward(
    f_h: Tensor,
    f_fus: Tensor,
    block: RscBlock,
    ratio: float,
    score_coupling: bool = True,
    selection: Optional[BandSelection] = None,
    score: Optional[BandScore] = None,
) -> BlockOutput:
    """One refinement block: select bands, couple scores, fuse with FFN(F_fus).

    A given `selection` (frozen or random) skips KBSM; `score` then supplies the coupling.
    """
    p = f_fus.shape[1]
    tokens = to_tokens(f_fus)
    if selection is None:
        if block.kbsm is None:
            raise ConfigurationError("block has no band selector and no selection was given")
        y, selection, score = kbsm_select(f_h, tokens, block.kbsm, ratio)
    else:
        y = gather_bands(f_h, selection)

    selected = y
    if score_coupling and score is not None:
        picked = gather(score.weighted, selection.indices, axis=0)
        selected = mul(y, sigmoid(reshape(picked, (1, selection.k))))

    fused = block.fusion(to_map(selected, p), to_map(block.ffn(tokens), p))
    return BlockOutput(fused=fused, selected=selected, selection=selection, score=score)


@dataclass
class ForwardTrace:
    logits: Tensor
    embedding: Tensor
    selections: List[BandSelection] = field(default_factory=list)
    scores: List[np.ndarray] = field(default_factory=list)


class RSCNet(Module):
    """The full network; all parameters are drawn from one generator seeded by config.seed."""

    def __init__(self, config: ModelConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        width = config.encoder_width

        self.hsi_encoder = HsiEncoder(config.hsi_hidden, rng)
        self.reduced_encoder = SpatialEncoder(config.reduced_input_bands, width, rng)
        self.aux_encoder = SpatialEncoder(config.aux_bands, width, rng)
        self.stem = Fusion(config.fusion, width, width, width, rng)

        learned = config.band_selector == "kbsm"
        block_count = 1 if config.share_block_params else config.num_blocks
        self.blocks = [
            RscBlock(config, with_kbsm=learned and (i == 0 or not config.freeze_selection), rng=rng)
            for i in range(block_count)
        ]
        self._fixed_selection = (
            None if learned else random_selection(config.bands, config.band_ratio, config.seed)
        )

        self.head = CrossAttention(width, config.selected_bands, width, rng)
        self.classifier_hidden = Linear(width, width, rng)
        self.classifier_out = Linear(width, config.num_classes, rng)
        logger.debug("Model built", parameters=self.count_params(), blocks=config.num_blocks)

    @property
    def fixed_selection(self) -> Optional[BandSelection]:
        """The seeded random subset used when KBSM is ablated, else None."""
        return self._fixed_selection

    # Inputs

    def _expect(self, patch: ArrayLike, channels: int, name: str) -> Tensor:
        p = self.config.patch_size
        shape = tuple(patch.shape)
        if shape != (channels, p, p):
            raise ShapeMismatch(f"{name} patch must be {channels}×{p}×{p}, got {shape}")
        return patch if isinstance(patch, Tensor) else Tensor(patch)

    def _inputs(self, hsi: ArrayLike, reduced: Optional[ArrayLike], aux: ArrayLike):
        config = self.config
        if not config.use_pca:
            reduced = hsi
        elif reduced is None:
            raise ShapeMismatch("a reduced patch is required when use_pca is on")
        hsi_t = self._expect(hsi, config.bands, "hsi")
        reduced_t = self._expect(reduced, config.reduced_input_bands, "reduced")
        aux_t = self._expect(aux, config.aux_bands, "aux")
        if config.sources == "hsi":
            aux_t = Tensor(np.zeros(aux_t.shape))
        elif config.sources == "aux":
            hsi_t = Tensor(np.zeros(hsi_t.shape))
            reduced_t = Tensor(np.zeros(reduced_t.shape))
        return hsi_t, reduced_t, aux_t

    def encode(self, patch: ArrayLike, which: Union[Stream, str]) -> Tensor:
        """Feature matrix of one stream: hw×c for HSI, hw×w for reduced/aux."""
        which = Stream(which)
        if which is Stream.HSI:
            return self.hsi_encoder(self._expect(patch, self.config.bands, "hsi"))
        if which is Stream.REDUCED:
            patch = self._expect(patch, self.config.reduced_input_bands, "reduced")
            return to_tokens(self.reduced_encoder(patch))
        return to_tokens(self.aux_encoder(self._expect(patch, self.config.aux_bands, "aux")))

    # Forward

    def forward_trace(
        self, hsi: ArrayLike, reduced: Optional[ArrayLike], aux: ArrayLike
    ) -> ForwardTrace:
        config = self.config
        hsi_t, reduced_t, aux_t = self._inputs(hsi, reduced, aux)

        f_h = self.hsi_encoder(hsi_t)
        f_fus = self.stem(self.reduced_encoder(reduced_t), self.aux_encoder(aux_t))

        selections: List[BandSelection] = []
        scores: List[np.ndarray] = []
        frozen: Optional[BandSelection] = self._fixed_selection
        frozen_score: Optional[BandScore] = None
        selected = None
        for i in range(config.num_blocks):
            block = self.blocks[0 if config.share_block_params else i]
            reuse = frozen is not None and (self._fixed_selection is not None or i > 0)
            out = rscb_forward(
                f_h,
                f_fus,
                block,
                config.band_ratio,
                score_coupling=config.score_coupling,
                selection=frozen if reuse else None,
                score=frozen_score if reuse else None,
            )
            f_fus, selected = out.fused, out.selected
            selections.append(out.selection)
            if out.score is not None:
                scores.append(out.score.numpy())
            if config.freeze_selection and i == 0 and self._fixed_selection is None:
                frozen, frozen_score = out.selection, out.score

        embedding = attention_pool(self.head, to_tokens(f_fus), selected)
        logits = self.classifier_out(gelu(self.classifier_hidden(embedding)))
        return ForwardTrace(logits=logits, embedding=embedding, selections=selections, scores=scores)

    def forward(self, hsi: ArrayLike, reduced: Optional[ArrayLike], aux: ArrayLike) -> Tensor:
        """Class logits (length C) for one sample."""
        return self.forward_trace(hsi, reduced, aux).logits

    def forward_batch(
        self, hsi: np.ndarray, reduced: Optional[np.ndarray], aux: np.ndarray
    ) -> Tensor:
        """B×C logits for a batch of channel-first patches."""
        rows = [
            self.forward(hsi[i], None if reduced is None else reduced[i], aux[i])
            for i in range(len(hsi))
        ]
        if not rows:
            raise ShapeMismatch("forward_batch needs at least one sample")
        return stack(rows, axis=0)

    def embed(self, hsi: ArrayLike, reduced: Optional[ArrayLike], aux: ArrayLike) -> np.ndarray:
        """Pooled feature vector fed to the classifier."""
        with no_grad():
            return self.forward_trace(hsi, reduced, aux).embedding.numpy()
