"""Dense-tensor numerics with reverse-mode differentiation."""

from .core import ComputeGraph, OpRecord, Tensor, is_grad_enabled, no_grad
from .conv import conv2d, conv3d
from .gradcheck import finite_diff_check
from .ops import (
    add,
    as_tensor,
    concat,
    cross_entropy,
    detach,
    div,
    exp,
    gather,
    gelu,
    global_avg_pool,
    linear,
    log_softmax,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    sigmoid,
    softmax,
    stack,
    sub,
    transpose,
)

__all__ = [
    "ComputeGraph",
    "OpRecord",
    "Tensor",
    "add",
    "as_tensor",
    "concat",
    "conv2d",
    "conv3d",
    "cross_entropy",
    "detach",
    "div",
    "exp",
    "finite_diff_check",
    "gather",
    "gelu",
    "global_avg_pool",
    "is_grad_enabled",
    "linear",
    "log_softmax",
    "matmul",
    "mean",
    "mul",
    "neg",
    "no_grad",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "stack",
    "sub",
    "transpose",
]
