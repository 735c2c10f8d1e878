"""Central finite-difference verification of analytic gradients."""

from typing import Callable, Optional, Sequence

import numpy as np
import structlog

from ..errors import NonFiniteGradient, ShapeMismatch
from .core import Tensor, no_grad

logger = structlog.get_logger(__name__)


def finite_diff_check(
    f: Callable[[], Tensor],
    leaves: Sequence[Tensor],
    h: float = 1e-6,
    max_per_leaf: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Compare backward() against central differences.

    Args:
        f: Deterministic closure building a scalar from the leaves
        leaves: Tensors to differentiate with respect to
        h: Central-difference step
        max_per_leaf: Check at most this many (seeded, random) elements per leaf
        seed: Seed for element sampling

    Returns:
        max over checked elements of |analytic - numeric| / max(1, |analytic|)
    """
    for leaf in leaves:
        leaf.zero_grad()
    out = f()
    if out.size != 1:
        raise ShapeMismatch(f"finite_diff_check needs a scalar function, got shape {out.shape}")
    out.backward()

    rng = np.random.default_rng(seed)
    worst = 0.0
    for position, leaf in enumerate(leaves):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
        if not np.isfinite(analytic).all():
            raise NonFiniteGradient(f"analytic gradient of leaf {position} is not finite")

        flat = leaf.data.reshape(-1)
        candidates = np.arange(flat.size)
        if max_per_leaf is not None and flat.size > max_per_leaf:
            candidates = np.sort(rng.choice(flat.size, size=max_per_leaf, replace=False))

        analytic_flat = analytic.reshape(-1)
        with no_grad():
            for index in candidates:
                original = flat[index]
                flat[index] = original + h
                plus = f().item()
                flat[index] = original - h
                minus = f().item()
                flat[index] = original
                numeric = (plus - minus) / (2.0 * h)
                if not np.isfinite(numeric):
                    raise NonFiniteGradient(
                        f"numeric gradient of leaf {position} element {index} is not finite"
                    )
                error = abs(analytic_flat[index] - numeric) / max(1.0, abs(analytic_flat[index]))
                worst = max(worst, float(error))

    logger.debug("Finite-difference check finished", leaves=len(leaves), max_rel_error=worst)
    return worst
