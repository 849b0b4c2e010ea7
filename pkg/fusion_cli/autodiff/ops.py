"""
Differentiable wrappers around the tensor kernels.

Every function accepts Nodes, Parameters, numpy arrays or floats and returns a
Node. Elementwise ops broadcast like numpy; their vjps sum the gradient back
down to each operand's shape.
"""
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ShapeError
from ..tensor import core
from .tape import Node, record

Operand = Union[Node, np.ndarray, float]


def lift(x: Operand) -> Node:
    return x if isinstance(x, Node) else Node(x)


def unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    return record(a.value + b.value, (a, b),
                  lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)))


def sub(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    return record(a.value - b.value, (a, b),
                  lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)))


def mul(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    return record(a.value * b.value, (a, b),
                  lambda g: (unbroadcast(g * b.value, a.shape), unbroadcast(g * a.value, b.shape)))


def div(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    out = a.value / b.value
    return record(out, (a, b),
                  lambda g: (unbroadcast(g / b.value, a.shape), unbroadcast(-g * out / b.value, b.shape)))


def scale(a: Operand, factor: float) -> Node:
    a = lift(a)
    return record(a.value * factor, (a,), lambda g: (g * factor,))


def sum_all(a: Operand) -> Node:
    a = lift(a)
    return record(np.sum(a.value).reshape(1), (a,), lambda g: (np.full(a.shape, g.reshape(-1)[0]),))


def mean_all(a: Operand) -> Node:
    a = lift(a)
    count = a.value.size
    return record(np.mean(a.value).reshape(1), (a,),
                  lambda g: (np.full(a.shape, g.reshape(-1)[0] / count),))


def absolute(a: Operand) -> Node:
    a = lift(a)
    return record(np.abs(a.value), (a,), lambda g: (g * np.sign(a.value),))


def sqrt(a: Operand) -> Node:
    """
    Square root with a zero subgradient at 0.
    """
    a = lift(a)
    out = np.sqrt(a.value)

    def vjp(g):
        safe = np.where(out > 0, out, 1.0)
        return (np.where(out > 0, g / (2.0 * safe), 0.0),)

    return record(out, (a,), vjp)


def maximum(a: Operand, b: Operand) -> Node:
    """
    Elementwise max; ties send the gradient to the first operand.
    """
    a, b = lift(a), lift(b)
    first = a.value >= b.value
    return record(np.maximum(a.value, b.value), (a, b),
                  lambda g: (unbroadcast(np.where(first, g, 0.0), a.shape),
                             unbroadcast(np.where(first, 0.0, g), b.shape)))


def sigmoid(a: Operand) -> Node:
    a = lift(a)
    out = core.sigmoid(a.value)
    return record(out, (a,), lambda g: (g * out * (1.0 - out),))


def silu(a: Operand) -> Node:
    a = lift(a)
    s = core.sigmoid(a.value)
    return record(a.value * s, (a,), lambda g: (g * (s + a.value * s * (1.0 - s)),))


def tanh(a: Operand) -> Node:
    a = lift(a)
    out = np.tanh(a.value)
    return record(out, (a,), lambda g: (g * (1.0 - out ** 2),))


def linear(x: Operand, w: Operand, bias: Optional[Operand] = None) -> Node:
    x, w = lift(x), lift(w)
    inputs = (x, w) if bias is None else (x, w, lift(bias))
    out = core.linear(x.value, w.value, None if bias is None else inputs[2].value)

    def vjp(g):
        dx = np.einsum('oc,nohw->nchw', w.value, g, optimize=True)
        dw = np.einsum('nohw,nchw->oc', g, x.value, optimize=True) if w.requires_grad else None
        if bias is None:
            return dx, dw
        return dx, dw, g.sum(axis=(0, 2, 3))

    return record(out, inputs, vjp)


def layer_norm(x: Operand, scale_: Operand, offset: Operand, eps: float = 1e-5) -> Node:
    x, scale_, offset = lift(x), lift(scale_), lift(offset)
    mean = x.value.mean(axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(x.value.var(axis=1, keepdims=True) + eps)
    normed = (x.value - mean) * rstd
    gamma = scale_.value.reshape(1, -1, 1, 1)
    out = normed * gamma + offset.value.reshape(1, -1, 1, 1)

    def vjp(g):
        dn = g * gamma
        dx = rstd * (dn - dn.mean(axis=1, keepdims=True) - normed * (dn * normed).mean(axis=1, keepdims=True))
        return dx, (g * normed).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

    return record(out, (x, scale_, offset), vjp)


def conv2d(x: Operand, w: Operand, bias: Optional[Operand] = None, stride: int = 1, dilation: int = 1,
           groups: int = 1, pad: int = 0) -> Node:
    x, w = lift(x), lift(w)
    inputs = (x, w) if bias is None else (x, w, lift(bias))
    out = core.conv2d(x.value, w.value, None if bias is None else inputs[2].value, stride=stride,
                      dilation=dilation, groups=groups, pad=pad)
    size = x.shape[2:]

    def vjp(g):
        dx = None
        if x.requires_grad:
            dx = core.conv_transpose2d(g, w.value, stride=stride, pad=pad, groups=groups, dilation=dilation,
                                       output_size=size)
        dw = None
        if w.requires_grad:
            dw = core.conv2d_weight_grad(x.value, g, w.shape[2], stride=stride, dilation=dilation,
                                         groups=groups, pad=pad)
        if bias is None:
            return dx, dw
        return dx, dw, g.sum(axis=(0, 2, 3))

    return record(out, inputs, vjp)


def conv_transpose2d(y: Operand, w: Operand, bias: Optional[Operand] = None, stride: int = 1, pad: int = 0,
                     groups: int = 1, dilation: int = 1,
                     output_size: Optional[Tuple[int, int]] = None) -> Node:
    y, w = lift(y), lift(w)
    inputs = (y, w) if bias is None else (y, w, lift(bias))
    out = core.conv_transpose2d(y.value, w.value, None if bias is None else inputs[2].value, stride=stride,
                                pad=pad, groups=groups, dilation=dilation, output_size=output_size)

    def vjp(g):
        dy = None
        if y.requires_grad:
            dy = core.conv2d(g, w.value, stride=stride, dilation=dilation, groups=groups, pad=pad)
        dw = None
        if w.requires_grad:
            dw = core.conv2d_weight_grad(g, y.value, w.shape[2], stride=stride, dilation=dilation,
                                         groups=groups, pad=pad)
        if bias is None:
            return dy, dw
        return dy, dw, g.sum(axis=(0, 2, 3))

    return record(out, inputs, vjp)


def concat_channels(parts: Sequence[Operand]) -> Node:
    nodes = [lift(p) for p in parts]
    out = core.concat_channels([n.value for n in nodes])
    bounds = np.cumsum([0] + [n.shape[1] for n in nodes])
    return record(out, tuple(nodes),
                  lambda g: tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(nodes))))


def channel_slice(x: Operand, start: int, stop: int) -> Node:
    x = lift(x)

    def vjp(g):
        full = np.zeros(x.shape)
        full[:, start:stop] = g
        return (full,)

    return record(np.ascontiguousarray(x.value[:, start:stop]), (x,), vjp)


def split_channels(x: Operand, sizes: Sequence[int]) -> List[Node]:
    x = lift(x)
    core.split_channels(x.value, sizes)
    bounds = np.cumsum([0] + list(sizes))
    return [channel_slice(x, int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes))]


def pad(x: Operand, p: int, mode: str = 'zero') -> Node:
    x = lift(x)
    return record(core.pad(x.value, p, mode), (x,), lambda g: (core.pad_adjoint(g, p, mode),))


def crop(x: Operand, top: int, left: int, height: int, width: int) -> Node:
    x = lift(x)

    def vjp(g):
        full = np.zeros(x.shape)
        full[:, :, top:top + height, left:left + width] = g
        return (full,)

    return record(core.crop(x.value, top, left, height, width), (x,), vjp)


def sobel_grad(x: Operand) -> Node:
    """
    Differentiable |grad x| with replicate padding.
    """
    x = lift(x)
    if x.value.ndim != 4 or x.shape[1] != 1:
        raise ShapeError('Sobel gradient expects a single channel [n, 1, h, w] but got {}'.format(x.shape))
    padded = pad(x, 1, 'replicate')
    gx = conv2d(padded, core.SOBEL_X.reshape(1, 1, 3, 3))
    gy = conv2d(padded, core.SOBEL_Y.reshape(1, 1, 3, 3))
    return sqrt(add(mul(gx, gx), mul(gy, gy)))
