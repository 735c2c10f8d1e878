"""Dense fp64 tensors with reverse-mode differentiation."""

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import NonFiniteError, ShapeMismatch

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_ids = itertools.count()
_grad_state = threading.local()


def is_grad_enabled() -> bool:
    """Whether ops record a graph on the current thread."""
    return getattr(_grad_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread."""
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


def _check_finite(array: np.ndarray, op: str) -> None:
    if not np.isfinite(array).all():
        raise NonFiniteError(f"non-finite values produced by '{op}'")


class Tensor:
    """A contiguous row-major float64 array with an optional gradient slot."""

    def __init__(self, data, requires_grad: bool = False):
        array = np.array(data, dtype=np.float64, copy=True, order="C")
        _check_finite(array, "leaf")
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.op = "leaf"
        self.id = next(_ids)
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardFn] = None

    @classmethod
    def _from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        op: str,
        backward: BackwardFn,
    ) -> "Tensor":
        out = cls.__new__(cls)
        # ascontiguousarray would promote 0-d results to shape (1,)
        array = np.asarray(data, dtype=np.float64)
        if not array.flags.c_contiguous:
            array = np.ascontiguousarray(array)
        _check_finite(array, op)
        out.data = array
        out.grad = None
        out.op = op
        out.id = next(_ids)
        track = is_grad_enabled() and any(p.requires_grad for p in parents)
        out.requires_grad = track
        out._parents = tuple(parents) if track else ()
        out._backward = backward if track else None
        return out

    # Introspection

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatch(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into every requires_grad leaf."""
        ComputeGraph.from_root(self).backward(grad)

    # Operators delegate to the functional ops

    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __neg__(self):
        from . import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def reshape(self, *shape) -> "Tensor":
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, axes: Optional[Sequence[int]] = None) -> "Tensor":
        from . import ops
        return ops.transpose(self, axes)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)


@dataclass(frozen=True)
class OpRecord:
    """One node of a recorded graph."""

    op: str
    input_ids: Tuple[int, ...]
    output_id: int


class ComputeGraph:
    """Topologically ordered view of the graph that produced a tensor.

    Not thread-safe: a graph instance belongs to the thread that built it.
    """

    def __init__(self, root: Tensor, order: List[Tensor]):
        self.root = root
        self._order = order

    @classmethod
    def from_root(cls, root: Tensor) -> "ComputeGraph":
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node.id in visited:
                continue
            visited.add(node.id)
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and parent.id not in visited:
                    stack.append((parent, False))
        return cls(root, order)

    @property
    def nodes(self) -> List[OpRecord]:
        return [
            OpRecord(op=t.op, input_ids=tuple(p.id for p in t._parents), output_id=t.id)
            for t in self._order
            if not t.is_leaf
        ]

    @property
    def leaves(self) -> List[Tensor]:
        return [t for t in self._order if t.is_leaf]

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        root = self.root
        if not root.requires_grad:
            return
        if grad is None:
            seed = np.ones_like(root.data)
        else:
            seed = np.array(grad, dtype=np.float64)
            if seed.shape != root.shape:
                raise ShapeMismatch(
                    f"seed gradient shape {seed.shape} does not match output {root.shape}"
                )

        # Intermediate gradients live only for this traversal; leaves accumulate.
        pending: Dict[int, np.ndarray] = {root.id: seed}
        for node in reversed(self._order):
            node_grad = pending.pop(node.id, None)
            if node_grad is None:
                continue
            if node.is_leaf:
                node.grad = node_grad.copy() if node.grad is None else node.grad + node_grad
                continue
            parent_grads = node._backward(node_grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent.id in pending:
                    pending[parent.id] = pending[parent.id] + parent_grad
                else:
                    pending[parent.id] = parent_grad
