"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Tensors record a tape of parent links and backward closures as operations
run; backward() on a scalar loss topologically sorts the tape, accumulates
gradients into every tensor that requires them, and then releases the graph.
Shapes follow the (batch, time, channels) convention for activations;
parameters keep their natural shapes.

The op set is exactly what the temporal-autoencoder stack needs: broadcast
add/sub/mul, 2-D matmul, reshape, reductions, ELU, and the three structured
time-axis primitives (dilated causal convolution, average pooling,
repeat upsampling).
"""
from __future__ import annotations

import contextlib

import numpy as np

from ..errors import GraphNotBuiltError, ShapeMismatchError

__all__ = [
    "Tensor",
    "no_grad",
    "backward",
    "add",
    "sub",
    "mul",
    "matmul",
    "reshape",
    "mean",
    "total",
    "elu",
    "causal_conv1d",
    "avg_pool1d",
    "upsample1d",
    "mse",
]

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (used for evaluation passes)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """An n-d float64 array with an optional gradient buffer and tape links."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn", "name")

    def __init__(self, data, requires_grad: bool = False, name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward_fn = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<Tensor{tag} shape={self.data.shape} grad={'set' if self.grad is not None else 'none'}>"

    def zero_grad(self):
        self.grad = None

    # convenience arithmetic (constants wrapped as non-grad tensors)
    def __add__(self, other):
        return add(self, _wrap(other))

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    def backward(self):
        backward(self)


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(data, parents, backward_fn) -> Tensor:
    """Create an op output, recording the tape only when useful."""
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = False
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
    return out


def backward(loss: Tensor):
    """Accumulate d(loss)/d(tensor) into .grad over the recorded graph.

    loss must be scalar. The graph is released afterwards, so a second
    backward on the same tape raises GraphNotBuiltError.
    """
    if loss._backward_fn is None and not loss._parents:
        raise GraphNotBuiltError("no computation graph recorded for this tensor")
    if loss.data.size != 1:
        raise ShapeMismatchError("backward requires a scalar loss")
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen and (parent._parents or parent.requires_grad):
                stack.append((parent, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward_fn is not None and node.grad is not None:
            node._backward_fn(node.grad)
        if node is not loss:
            node._parents = ()
            node._backward_fn = None
    loss._parents = ()
    loss._backward_fn = None


def _accumulate(t: Tensor, g: np.ndarray):
    # callers hand over fresh arrays (or views they never mutate), and
    # accumulation allocates, so storing without copying is safe
    if not (t.requires_grad or t._parents):
        return
    if t.grad is None:
        t.grad = g
    else:
        t.grad = t.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    return _node(a.data + b.data, (a, b), back)


def sub(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _node(a.data - b.data, (a, b), back)


def mul(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _node(a.data * b.data, (a, b), back)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeMismatchError("matmul expects 2-D operands")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatchError(f"matmul {a.data.shape} @ {b.data.shape}")

    def back(g):
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    return _node(a.data @ b.data, (a, b), back)


def reshape(a: Tensor, shape) -> Tensor:
    def back(g):
        _accumulate(a, g.reshape(a.data.shape))

    return _node(a.data.reshape(shape), (a,), back)


def total(a: Tensor) -> Tensor:
    """Sum of all elements (scalar tensor)."""

    def back(g):
        _accumulate(a, np.broadcast_to(g, a.data.shape))

    return _node(a.data.sum(), (a,), back)


def mean(a: Tensor) -> Tensor:
    n = a.data.size

    def back(g):
        _accumulate(a, np.broadcast_to(g / n, a.data.shape))

    return _node(a.data.mean(), (a,), back)


def elu(a: Tensor, alpha: float = 1.0) -> Tensor:
    pos = a.data > 0
    out = np.where(pos, a.data, alpha * np.expm1(a.data))

    def back(g):
        _accumulate(a, g * np.where(pos, 1.0, out + alpha))

    return _node(out, (a,), back)


def causal_conv1d(x: Tensor, weight: Tensor, bias: Tensor, dilation: int = 1) -> Tensor:
    """Dilated causal 1-D convolution with zero left-padding.

    x is (batch, time, in_channels); weight is (kernel, in, out) with
    weight[k] applied to the sample lagged by k*dilation, so the output at
    time t depends only on inputs at times <= t and keeps the input's
    length; bias is (out,).

    Computed as one matmul against all taps at once, followed by shifted
    accumulation per tap (the time shift commutes with the channel
    contraction); the backward pass mirrors it with two matmuls.
    """
    if x.data.ndim != 3 or weight.data.ndim != 3:
        raise ShapeMismatchError("conv expects (B,T,C) input and (K,Cin,Cout) weight")
    B, T, Cin = x.data.shape
    K, win, Cout = weight.data.shape
    if win != Cin:
        raise ShapeMismatchError(f"input channels {Cin} != weight channels {win}")
    if bias.data.shape != (Cout,):
        raise ShapeMismatchError("bias shape must be (out_channels,)")
    if dilation < 1:
        raise ValueError("dilation must be >= 1")
    w_all = weight.data.transpose(1, 0, 2).reshape(Cin, K * Cout)
    x2 = x.data.reshape(B * T, Cin)
    taps = (x2 @ w_all).reshape(B, T, K, Cout)
    out = np.empty((B, T, Cout))
    out[:] = bias.data
    out += taps[:, :, 0, :]
    for k in range(1, K):
        shift = k * dilation
        if shift < T:
            out[:, shift:, :] += taps[:, : T - shift, k, :]

    def back(g):
        gshift = np.zeros((B, T, K, Cout))
        gshift[:, :, 0, :] = g
        for k in range(1, K):
            shift = k * dilation
            if shift < T:
                gshift[:, : T - shift, k, :] = g[:, shift:, :]
        g2 = gshift.reshape(B * T, K * Cout)
        dw = (x2.T @ g2).reshape(Cin, K, Cout).transpose(1, 0, 2)
        _accumulate(weight, dw)
        _accumulate(bias, g.sum(axis=(0, 1)))
        if x.requires_grad or x._parents:
            _accumulate(x, (g2 @ w_all.T).reshape(B, T, Cin))

    return _node(out, (x, weight, bias), back)


def avg_pool1d(x: Tensor, rate: int) -> Tensor:
    """Downsample the time axis by averaging non-overlapping blocks."""
    if x.data.ndim != 3:
        raise ShapeMismatchError("pooling expects (B,T,C)")
    B, T, C = x.data.shape
    if rate < 1 or T % rate != 0:
        raise ShapeMismatchError(f"pool rate {rate} must divide time length {T}")
    out = x.data.reshape(B, T // rate, rate, C).mean(axis=2)

    def back(g):
        _accumulate(
            x,
            np.repeat(g, rate, axis=1) / rate,
        )

    return _node(out, (x,), back)


def upsample1d(x: Tensor, rate: int) -> Tensor:
    """Expand the time axis by repeating each sample `rate` times."""
    if x.data.ndim != 3:
        raise ShapeMismatchError("upsampling expects (B,T,C)")
    if rate < 1:
        raise ValueError("rate must be >= 1")
    B, T, C = x.data.shape

    def back(g):
        _accumulate(x, g.reshape(B, T, rate, C).sum(axis=2))

    return _node(np.repeat(x.data, rate, axis=1), (x,), back)


def mse(predicted: Tensor, target: Tensor) -> Tensor:
    """Mean squared error over all elements."""
    if predicted.data.shape != target.data.shape:
        raise ShapeMismatchError(
            f"prediction {predicted.data.shape} vs target {target.data.shape}"
        )
    diff = sub(predicted, target)
    return mean(mul(diff, diff))
