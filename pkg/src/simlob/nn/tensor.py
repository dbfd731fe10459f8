"""Minimal reverse-mode autodiff tensor over numpy arrays.

Each differentiable result keeps its parents and a backward closure mapping the output
gradient to one gradient per parent. `Tensor.backward()` walks the graph once in reverse
topological order.
"""

import logging
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager

import numpy as np

from simlob.exceptions import NonFiniteError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Build no graph inside the block (inference)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


def check_finite(values: np.ndarray, op: str, phase: str = "forward") -> None:
    """Raise NonFiniteError naming `op` if any entry is NaN or Inf."""
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(op, phase)


class Tensor:
    """An array with an optional gradient and the recipe to backpropagate through it."""

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data: np.ndarray | float | list, requires_grad: bool = False, dtype=None):
        array = np.asarray(data, dtype=dtype)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = "leaf"
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    @classmethod
    def from_op(
        cls, data: np.ndarray, parents: Sequence["Tensor"], backward: BackwardFn, op: str
    ) -> "Tensor":
        """Wrap an op result; the graph edge is only kept when some parent needs a gradient."""
        check_finite(data, op)
        requires = _grad_enabled and any(p.requires_grad for p in parents)
        out = cls(data, requires_grad=requires)
        out.op = op
        if requires:
            out._parents = tuple(parents)
            out._backward = backward
        return out

    def _topological_order(self) -> list["Tensor"]:
        """Nodes reachable from self, parents before children, each exactly once."""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's `.grad`.

        Intermediate gradients are released once propagated.

        Raises:
            NonFiniteError: If a backward rule produces NaN or Inf
        """
        if not self.requires_grad:
            return
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient needs a scalar output")
            grad = np.ones_like(self.data)
        self.grad = np.asarray(grad, dtype=self.dtype)

        for node in reversed(self._topological_order()):
            if node._backward is None or node.grad is None:
                continue
            parent_grads = node._backward(node.grad)
            for parent, g in zip(node._parents, parent_grads, strict=True):
                if g is None or not parent.requires_grad:
                    continue
                check_finite(g, node.op, "backward")
                g = g.astype(parent.dtype, copy=False)
                parent.grad = g.copy() if parent.grad is None else parent.grad + g
            node.grad = None


def parameter(data: np.ndarray, dtype=np.float64) -> Tensor:
    """A leaf tensor that receives gradients."""
    return Tensor(np.array(data, dtype=dtype), requires_grad=True)
