"""A small reverse-mode automatic differentiation engine over numpy arrays.

Tensors wrap float64 arrays of rank at most 3, laid out as (batch, channels,
length) when rank 3.  Each operation that sees a differentiable input records
a backward closure and parent links; backward() on a scalar walks the implied
graph once in reverse topological order, accumulates gradients into .grad, and
frees the graph.  There is no broadcasting beyond python scalars: elementwise
operations demand identical shapes.
"""

from __future__ import annotations

import numbers

import numpy as np
from scipy.special import expit

from .errors import ShapeError


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 3:
            raise ShapeError(f"rank {arr.ndim} tensor; this engine stops at rank 3")
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents = ()

    # ------------------------------------------------------------------ #
    # graph plumbing
    # ------------------------------------------------------------------ #
    @classmethod
    def _node(cls, data, parents) -> "Tensor":
        """Result tensor that participates in the graph iff a parent does."""
        out = cls(data, requires_grad=any(p.requires_grad for p in parents))
        if out.requires_grad:
            out._parents = tuple(parents)
        return out

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False)

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on a tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def backward(self):
        """Accumulate d(self)/d(leaf) into every reachable leaf's .grad.

        Only scalar tensors may start a backward pass, and the tensor must be
        attached to a recorded computation (a detached or constant result has
        nothing to propagate into).
        """
        if self.data.size != 1:
            raise ShapeError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise ValueError("backward() on a detached tensor")
        # iterative post-order traversal; recursion would limit graph depth
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None:
                node._backward()
            # free the graph; gradients stay, connectivity does not
            node._backward = None
            node._parents = ()

    # ------------------------------------------------------------------ #
    # elementwise arithmetic (same shape, or a python scalar)
    # ------------------------------------------------------------------ #
    def __add__(self, other):
        if isinstance(other, numbers.Number):
            out = Tensor._node(self.data + other, (self,))
            if out.requires_grad:
                def _bw():
                    self._accumulate(out.grad)
                out._backward = _bw
            return out
        if not isinstance(other, Tensor):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeError(f"add shapes differ: {self.shape} vs {other.shape}")
        a, b = self, other
        out = Tensor._node(a.data + b.data, (a, b))
        if out.requires_grad:
            def _bw():
                if a.requires_grad:
                    a._accumulate(out.grad)
                if b.requires_grad:
                    b._accumulate(out.grad)
            out._backward = _bw
        return out

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            s = float(other)
            out = Tensor._node(self.data * s, (self,))
            if out.requires_grad:
                def _bw():
                    self._accumulate(out.grad * s)
                out._backward = _bw
            return out
        if not isinstance(other, Tensor):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeError(f"mul shapes differ: {self.shape} vs {other.shape}")
        a, b = self, other
        out = Tensor._node(a.data * b.data, (a, b))
        if out.requires_grad:
            def _bw():
                if a.requires_grad:
                    a._accumulate(out.grad * b.data)
                if b.requires_grad:
                    b._accumulate(out.grad * a.data)
            out._backward = _bw
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            return self + (-float(other))
        if not isinstance(other, Tensor):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def sum(self) -> "Tensor":
        out = Tensor._node(np.asarray(self.data.sum()), (self,))
        if out.requires_grad:
            def _bw():
                self._accumulate(out.grad * np.ones_like(self.data))
            out._backward = _bw
        return out


# ---------------------------------------------------------------------- #
# activations and losses
# ---------------------------------------------------------------------- #
def relu(x: Tensor) -> Tensor:
    out = Tensor._node(np.maximum(x.data, 0.0), (x,))
    if out.requires_grad:
        mask = x.data > 0.0
        def _bw():
            x._accumulate(out.grad * mask)
        out._backward = _bw
    return out


def sigmoid(x: Tensor) -> Tensor:
    y = expit(x.data)
    out = Tensor._node(y, (x,))
    if out.requires_grad:
        def _bw():
            x._accumulate(out.grad * y * (1.0 - y))
        out._backward = _bw
    return out


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean over all elements of the squared difference; a scalar tensor."""
    if a.shape != b.shape:
        raise ShapeError(f"mse shapes differ: {a.shape} vs {b.shape}")
    diff = a.data - b.data
    out = Tensor._node(np.asarray(np.mean(diff * diff)), (a, b))
    if out.requires_grad:
        scale = 2.0 / diff.size
        def _bw():
            g = out.grad * scale * diff
            if a.requires_grad:
                a._accumulate(g)
            if b.requires_grad:
                b._accumulate(-g)
        out._backward = _bw
    return out


# ---------------------------------------------------------------------- #
# structural ops on (B, C, L) tensors
# ---------------------------------------------------------------------- #
def avg_pool1d(x: Tensor, window: int) -> Tensor:
    """Non-overlapping window means along the last axis."""
    if x.data.ndim != 3:
        raise ShapeError(f"avg_pool1d wants rank 3, got shape {x.shape}")
    w = int(window)
    if w < 1:
        raise ShapeError(f"pool window must be >= 1, got {window}")
    b_, c_, l_ = x.shape
    if l_ % w != 0:
        raise ShapeError(f"pool window {w} does not divide length {l_}")
    y = x.data.reshape(b_, c_, l_ // w, w).mean(axis=3)
    out = Tensor._node(y, (x,))
    if out.requires_grad:
        def _bw():
            x._accumulate(np.repeat(out.grad, w, axis=2) / w)
        out._backward = _bw
    return out


def upsample1d(x: Tensor, factor: int) -> Tensor:
    """Nearest-neighbor upsampling: each element repeated `factor` times."""
    if x.data.ndim != 3:
        raise ShapeError(f"upsample1d wants rank 3, got shape {x.shape}")
    f = int(factor)
    if f < 1:
        raise ShapeError(f"upsample factor must be >= 1, got {factor}")
    y = np.repeat(x.data, f, axis=2)
    out = Tensor._node(y, (x,))
    if out.requires_grad:
        b_, c_, l_ = x.shape
        def _bw():
            x._accumulate(out.grad.reshape(b_, c_, l_, f).sum(axis=3))
        out._backward = _bw
    return out
