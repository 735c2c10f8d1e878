"""Network layers: band selection, cross-source fusion and the assembled model."""

from .attention import CrossAttention, CrossAttentionFusion
from .cafm import (
    CafmParams,
    SourceWeights,
    cafm_forward,
    combine_sources,
    cross_source_weighting,
    local_global_refine,
)
from .checkpoint import load_arrays, load_checkpoint, restore_model, save_arrays, save_checkpoint
from .kbsm import (
    BandScore,
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
from .module import Conv2d, Conv3d, Linear, Module, count_params
from .rscnet import ForwardTrace, ModelConfig, RSCNet, Stream, rscb_forward

__all__ = [
    "BandScore",
    "BandSelection",
    "CafmParams",
    "Conv2d",
    "Conv3d",
    "CrossAttention",
    "CrossAttentionFusion",
    "ForwardTrace",
    "KbsmParams",
    "Linear",
    "ModelConfig",
    "Module",
    "RSCNet",
    "SourceWeights",
    "Stream",
    "attention_map",
    "cafm_forward",
    "combine_sources",
    "count_params",
    "cross_source_weighting",
    "gather_bands",
    "kbsm_forward",
    "kbsm_select",
    "load_arrays",
    "load_checkpoint",
    "local_global_refine",
    "random_selection",
    "restore_model",
    "rscb_forward",
    "retained_count",
    "save_arrays",
    "save_checkpoint",
    "score_bands",
    "select_topk",
]
