"""`gradcheck`: finite-difference verification of every op and a toy network."""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel

from ..nn.rscnet import ModelConfig, RSCNet
from ..tensor import Tensor, finite_diff_check
from ..tensor import ops
from ..tensor.conv import conv2d, conv3d
from .manifest import start_manifest, write_json, write_manifest

logger = structlog.get_logger(__name__)

GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_STEP = 1e-6

Case = Tuple[Callable[[], Tensor], List[Tensor]]


class GradcheckResult(BaseModel):
    errors: Dict[str, float]
    max_rel_error: float
    tolerance: float = GRADCHECK_TOLERANCE
    passed: bool


def _leaf(rng: np.random.Generator, *shape: int, positive: bool = False) -> Tensor:
    values = rng.uniform(0.5, 1.5, size=shape) if positive else rng.standard_normal(shape)
    return Tensor(values, requires_grad=True)


def _weighted(out: Tensor, rng: np.random.Generator) -> Callable[[Tensor], Tensor]:
    # Fixed random weights make every output element contribute differently.
    weights = Tensor(rng.standard_normal(out.shape))
    return lambda t: ops.sum(ops.mul(t, weights))


def _case(build: Callable[..., Tensor], leaves: Sequence[Tensor], rng: np.random.Generator) -> Case:
    with_weights = _weighted(build(*leaves), rng)
    return (lambda: with_weights(build(*leaves))), list(leaves)


def op_cases(seed: int = 0) -> Dict[str, Case]:
    """One small randomized scalar function per differentiable op."""
    rng = np.random.default_rng(seed)
    cases: Dict[str, Case] = {}

    def add(name: str, build: Callable[..., Tensor], *leaves: Tensor) -> None:
        cases[name] = _case(build, leaves, rng)

    add("add", lambda a, b: ops.add(a, b), _leaf(rng, 3, 4), _leaf(rng, 4))
    add("sub", lambda a, b: ops.sub(a, b), _leaf(rng, 3, 4), _leaf(rng, 3, 1))
    add("mul", lambda a, b: ops.mul(a, b), _leaf(rng, 3, 4), _leaf(rng, 3, 4))
    add("div", lambda a, b: ops.div(a, b), _leaf(rng, 3, 4), _leaf(rng, 3, 4, positive=True))
    add("neg", ops.neg, _leaf(rng, 5))
    add("exp", ops.exp, _leaf(rng, 2, 3))
    add("matmul", ops.matmul, _leaf(rng, 3, 4), _leaf(rng, 4, 2))
    add("linear", ops.linear, _leaf(rng, 3, 4), _leaf(rng, 4, 2), _leaf(rng, 2))
    add("reshape", lambda a: ops.reshape(a, (4, 3)), _leaf(rng, 2, 6))
    add("transpose", lambda a: ops.transpose(a, (2, 0, 1)), _leaf(rng, 2, 3, 4))
    add("concat", lambda a, b: ops.concat([a, b], axis=1), _leaf(rng, 2, 3), _leaf(rng, 2, 2))
    add("stack", lambda a, b: ops.stack([a, b], axis=0), _leaf(rng, 3), _leaf(rng, 3))
    add("gather", lambda a: ops.gather(a, [4, 0, 2], axis=1), _leaf(rng, 3, 5))
    add("sum", lambda a: ops.sum(a, axis=0), _leaf(rng, 3, 4))
    add("mean", lambda a: ops.mean(a, axis=1), _leaf(rng, 3, 4))
    add("global_avg_pool", ops.global_avg_pool, _leaf(rng, 2, 3, 3))
    add("relu", ops.relu, Tensor(rng.choice([-1.0, 1.0], size=(3, 4)) * rng.uniform(0.1, 1.0, size=(3, 4)), requires_grad=True))
    add("sigmoid", ops.sigmoid, _leaf(rng, 3, 4))
    add("gelu", ops.gelu, _leaf(rng, 3, 4))
    add("softmax", lambda a: ops.softmax(a, axis=0), _leaf(rng, 3, 4))
    add("log_softmax", lambda a: ops.log_softmax(a, axis=1), _leaf(rng, 3, 4))
    add("conv2d", lambda x, k, b: conv2d(x, k, b), _leaf(rng, 2, 4, 4), _leaf(rng, 3, 2, 3, 3), _leaf(rng, 3))
    add("conv3d", lambda x, k: conv3d(x, k), _leaf(rng, 1, 3, 4, 4), _leaf(rng, 2, 1, 3, 3, 3))

    logits = _leaf(rng, 4, 3)
    cases["cross_entropy"] = (lambda: ops.cross_entropy(logits, [0, 2, 1, 2]), [logits])
    return cases


def toy_network_case(seed: int = 0) -> Case:
    """Full N=1 network on a four-sample batch: 2 classes, c=6, p=5."""
    config = ModelConfig(
        bands=6,
        aux_bands=2,
        num_classes=2,
        patch_size=5,
        band_ratio=0.5,
        num_blocks=1,
        reduced_bands=2,
        seed=seed,
    )
    model = RSCNet(config)
    rng = np.random.default_rng(seed + 1)
    hsi = rng.standard_normal((4, 6, 5, 5))
    reduced = rng.standard_normal((4, 2, 5, 5))
    aux = rng.standard_normal((4, 2, 5, 5))

    def loss() -> Tensor:
        return ops.cross_entropy(model.forward_batch(hsi, reduced, aux), [0, 1, 1, 0])

    return loss, model.parameters()


def run_gradcheck(
    seed: int = 0,
    samples_per_leaf: Optional[int] = 8,
    out: Optional[Union[str, Path]] = None,
) -> GradcheckResult:
    """Check every op and the toy network; passed iff max relative error <= 1e-4."""
    manifest = start_manifest("gradcheck", [], seed=seed, samples_per_leaf=samples_per_leaf)
    errors: Dict[str, float] = {}
    with manifest.timed("ops"):
        for name, (f, leaves) in op_cases(seed).items():
            errors[name] = finite_diff_check(f, leaves, h=GRADCHECK_STEP, seed=seed)
    with manifest.timed("network"):
        f, leaves = toy_network_case(seed)
        errors["rscnet_toy"] = finite_diff_check(
            f, leaves, h=GRADCHECK_STEP, max_per_leaf=samples_per_leaf, seed=seed
        )

    worst = max(errors.values())
    result = GradcheckResult(
        errors=errors, max_rel_error=worst, passed=worst <= GRADCHECK_TOLERANCE
    )
    logger.info("Gradient check finished", max_rel_error=worst, passed=result.passed)
    if out is not None:
        out = Path(out)
        path = write_json(result.model_dump(mode="json"), out / "gradcheck.json")
        manifest.add_output(out, path)
        write_manifest(manifest, out)
    return result
