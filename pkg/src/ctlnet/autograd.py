"""Minimal reverse-mode differentiation over dense float64 tensors.

Forward ops record nodes onto the active ``Tape`` (a ``with Tape() as t:``
block); ``backward(root, tape)`` replays the nodes in reverse and accumulates
gradients into every ``requires_grad`` leaf. With no active tape, ops compute
plain forward values, which is the inference path.

Broadcasting is deliberately limited to trailing-dimension (bias-style)
broadcast in ``add``; everything else demands exact shapes.
"""

from __future__ import annotations

import math
import threading
from typing import Callable, Optional, Sequence

import numpy as np

from ctlnet import _kernels as K
from ctlnet.errors import ContractError, ShapeError

_ACTIVATIONS = ("tanh", "sigmoid", "relu")


def _as_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    return np.ascontiguousarray(arr)


class Tensor:
    """Dense n-dimensional float64 array with an optional gradient slot.

    ``data`` is the row-major value buffer; ``grad`` is filled by a backward
    pass for tensors created with ``requires_grad=True`` and is accumulated
    additively across passes until cleared.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, values, requires_grad: bool = False):
        self.data = _as_array(values)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


class _Node:
    __slots__ = ("inputs", "output", "backward_fn")

    def __init__(self, inputs, output, backward_fn):
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


_state = threading.local()


def _tape_stack() -> list:
    stack = getattr(_state, "stack", None)
    if stack is None:
        stack = []
        _state.stack = stack
    return stack


def active_tape() -> Optional["Tape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tape:
    """Per-forward-pass record of operations.

    Nodes are appended in execution order, so the list is topologically
    sorted by construction and a reverse sweep is a valid backward schedule.
    A tape must not be shared between threads; use one per training step and
    discard it after ``backward``.
    """

    def __init__(self):
        self.nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _tape_stack().pop()

    def record(
        self,
        inputs: Sequence[Tensor],
        output: Tensor,
        backward_fn: Callable[[np.ndarray], tuple],
    ) -> None:
        """Append a node. ``backward_fn`` maps the output gradient to one
        gradient array (or None) per input, in order."""
        self.nodes.append(_Node(tuple(inputs), output, backward_fn))

    def reset(self) -> None:
        self.nodes.clear()


def _record(inputs: Sequence[Tensor], output: Tensor, backward_fn) -> Tensor:
    """Record the op on the active tape when any input participates in grad."""
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        output.requires_grad = True
        tape.record(inputs, output, backward_fn)
    return output


def backward(root: Tensor, tape: Tape) -> None:
    """Accumulate d(root)/d(leaf) into every requires_grad leaf on the tape.

    The root must be a single-element tensor produced by an op recorded on
    this tape. Interior gradients are held in a scratch table; fan-out adds
    contributions in a fixed reverse-tape order, so repeated runs are
    bit-identical.
    """
    if root.size != 1:
        raise ContractError(f"backward root must be scalar, got shape {root.shape}")
    produced = {id(node.output) for node in tape.nodes}
    if id(root) not in produced:
        raise ContractError("backward root was not produced by an op on this tape")

    table: dict[int, list] = {id(root): [root, np.ones_like(root.data)]}
    for node in reversed(tape.nodes):
        entry = table.pop(id(node.output), None)
        if entry is None:
            continue
        input_grads = node.backward_fn(entry[1])
        for tensor, grad in zip(node.inputs, input_grads):
            if grad is None or not tensor.requires_grad:
                continue
            slot = table.get(id(tensor))
            if slot is None:
                table[id(tensor)] = [tensor, np.array(grad, dtype=np.float64, copy=True)]
            else:
                slot[1] += grad

    for tensor, grad in table.values():
        if tensor.requires_grad:
            tensor.grad = grad if tensor.grad is None else tensor.grad + grad


def _reduce_to(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient down to ``shape`` (inverse of trailing broadcast)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# primitive ops


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; ``b`` may broadcast over ``a``'s leading dimensions
    when its shape is a trailing suffix of ``a``'s (bias-style)."""
    if a.shape != b.shape and (
        b.ndim > a.ndim or b.shape != a.shape[a.ndim - b.ndim :]
    ):
        raise ShapeError(f"add: cannot broadcast {b.shape} over {a.shape}")
    out = Tensor(a.data + b.data)

    def backward_fn(g):
        return g, _reduce_to(g, b.shape)

    return _record((a, b), out, backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Hadamard product of same-shape tensors."""
    if a.shape != b.shape:
        raise ShapeError(f"mul: shapes differ, {a.shape} vs {b.shape}")
    out = Tensor(a.data * b.data)
    a_data, b_data = a.data, b.data

    def backward_fn(g):
        return g * b_data, g * a_data

    return _record((a, b), out, backward_fn)


def scale(a: Tensor, factor: float) -> Tensor:
    """Multiply by a Python scalar constant."""
    factor = float(factor)
    out = Tensor(a.data * factor)

    def backward_fn(g):
        return (g * factor,)

    return _record((a,), out, backward_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes broadcast.

    Backward: dA = g @ B^T and dB = A^T @ g, each summed back to the
    operand's shape when it was broadcast.
    """
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("matmul operands must have at least 2 dimensions")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(
            f"matmul: inner dimensions disagree, {a.shape} vs {b.shape}"
        )
    out = Tensor(np.matmul(a.data, b.data))
    a_data, b_data = a.data, b.data

    def backward_fn(g):
        ga = _reduce_to(np.matmul(g, np.swapaxes(b_data, -1, -2)), a_data.shape)
        gb = _reduce_to(np.matmul(np.swapaxes(a_data, -1, -2), g), b_data.shape)
        return ga, gb

    return _record((a, b), out, backward_fn)


def elementwise(kind: str, a: Tensor) -> Tensor:
    """Apply tanh, sigmoid, or relu per element with its exact derivative."""
    if kind == "tanh":
        out_data = np.tanh(a.data)

        def backward_fn(g, y=out_data):
            return (g * (1.0 - y * y),)

    elif kind == "sigmoid":
        out_data = 1.0 / (1.0 + np.exp(-a.data))

        def backward_fn(g, y=out_data):
            return (g * y * (1.0 - y),)

    elif kind == "relu":
        out_data = np.maximum(a.data, 0.0)
        mask = (a.data > 0.0).astype(np.float64)

        def backward_fn(g, m=mask):
            return (g * m,)

    else:
        raise ContractError(f"unknown elementwise kind {kind!r}; expected one of {_ACTIVATIONS}")
    return _record((a,), Tensor(out_data), backward_fn)


def tanh(a: Tensor) -> Tensor:
    return elementwise("tanh", a)


def sigmoid(a: Tensor) -> Tensor:
    return elementwise("sigmoid", a)


def relu(a: Tensor) -> Tensor:
    return elementwise("relu", a)


def softmax_rows(a: Tensor) -> Tensor:
    """Softmax along the last axis (each row nonnegative, summing to 1)."""
    rows = a.data.reshape(-1, a.shape[-1]) if a.ndim != 2 else a.data
    y2 = K.softmax_fwd(np.ascontiguousarray(rows))
    out = Tensor(y2.reshape(a.shape))

    def backward_fn(g, y=y2, shape=a.shape):
        dx = K.softmax_bwd(np.ascontiguousarray(g.reshape(y.shape)), y)
        return (dx.reshape(shape),)

    return _record((a,), out, backward_fn)


def layernorm(a: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean and unit variance, then apply
    the learnable affine gain and bias."""
    d = a.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(
            f"layernorm: gain/bias must have shape ({d},), got {gain.shape} and {bias.shape}"
        )
    if eps <= 0.0:
        raise ContractError("layernorm eps must be positive")
    rows = np.ascontiguousarray(a.data.reshape(-1, d))
    y2, xhat, rstd = K.layernorm_fwd(rows, gain.data, bias.data, eps)
    out = Tensor(y2.reshape(a.shape))

    def backward_fn(g, xhat=xhat, rstd=rstd, gdata=gain.data, shape=a.shape):
        dy = np.ascontiguousarray(g.reshape(xhat.shape))
        dx, dgain, dbias = K.layernorm_bwd(dy, xhat, rstd, gdata)
        return dx.reshape(shape), dgain, dbias

    return _record((a, gain, bias), out, backward_fn)


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared elementwise differences, as a scalar tensor."""
    if pred.shape != target.shape:
        raise ShapeError(
            f"mse_loss: shapes differ, {pred.shape} vs {target.shape}"
        )
    diff = pred.data - target.data
    count = diff.size
    out = Tensor(np.mean(diff * diff))

    def backward_fn(g):
        gd = (2.0 / count) * diff * g
        return gd, -gd

    return _record((pred, target), out, backward_fn)


def sum_all(a: Tensor) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    out = Tensor(a.data.sum())

    def backward_fn(g, shape=a.shape):
        return (np.broadcast_to(g, shape).astype(np.float64),)

    return _record((a,), out, backward_fn)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if math.prod(shape) != a.size:
        raise ShapeError(f"reshape: cannot view {a.shape} as {shape}")
    out = Tensor(a.data.reshape(shape))

    def backward_fn(g, orig=a.shape):
        return (g.reshape(orig),)

    return _record((a,), out, backward_fn)


def swap_axes(a: Tensor, axis1: int, axis2: int) -> Tensor:
    out = Tensor(np.swapaxes(a.data, axis1, axis2))

    def backward_fn(g):
        return (np.swapaxes(g, axis1, axis2),)

    return _record((a,), out, backward_fn)


def narrow(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """Slice ``[start, stop)`` along one axis (gradient zero-fills the rest)."""
    axis = axis % a.ndim
    if not 0 <= start < stop <= a.shape[axis]:
        raise ShapeError(
            f"narrow: [{start}, {stop}) out of range for axis {axis} of {a.shape}"
        )
    index = tuple(
        slice(start, stop) if dim == axis else slice(None) for dim in range(a.ndim)
    )
    out = Tensor(a.data[index])

    def backward_fn(g, shape=a.shape):
        dx = np.zeros(shape, dtype=np.float64)
        dx[index] = g
        return (dx,)

    return _record((a,), out, backward_fn)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along one axis; gradient splits back to each piece."""
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    axis = axis % tensors[0].ndim
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum(sizes)[:-1]

    def backward_fn(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, offsets, axis=axis))

    return _record(tuple(tensors), out, backward_fn)
