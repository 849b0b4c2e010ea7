"""
Dense NCHW float64 kernels shared by every other module.

All functions are pure: they never modify their inputs and return fresh
arrays. Convolutions follow the cross-correlation convention (no kernel flip).
The FFT pair is orthonormal, so ifft2(fft2(x)) == x and Parseval holds with
no extra scale factor.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..errors import NumericalError, ShapeError

Tensor = np.ndarray

PAD_MODES = ('zero', 'replicate', 'reflect')

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()


class Spectrum(object):
    """
    Complex 2-D spectrum of an NCHW tensor stored as paired real and imaginary planes.
    """

    def __init__(self, re: np.ndarray, im: np.ndarray):
        if re.shape != im.shape:
            raise ShapeError('Spectrum planes disagree: re {} vs im {}'.format(re.shape, im.shape))
        self.re = re
        self.im = im

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.re.shape

    def power(self) -> np.ndarray:
        return self.re ** 2 + self.im ** 2

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    @staticmethod
    def from_complex(z: np.ndarray) -> 'Spectrum':
        return Spectrum(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag))

    def __repr__(self):
        return 'Spectrum(shape={})'.format(self.shape)


def as_tensor(x, name: str = 'tensor') -> Tensor:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim != 4:
        raise ShapeError('{} must be 4-D [n, c, h, w] but has shape {}'.format(name, array.shape))
    return array


def check_finite(x: np.ndarray, stage: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericalError('Non-finite values produced at stage "{}"'.format(stage))
    return x


def conv_output_size(size: int, kernel: int, stride: int, dilation: int, pad: int) -> int:
    return (size + 2 * pad - dilation * (kernel - 1) - 1) // stride + 1


def _check_conv_args(c_in: int, w: np.ndarray, stride: int, dilation: int, groups: int, pad: int):
    if w.ndim != 4 or w.shape[2] != w.shape[3]:
        raise ShapeError('Kernel must be [c_out, c_in/groups, k, k] but has shape {}'.format(w.shape))
    if groups < 1 or c_in % groups != 0:
        raise ShapeError('groups={} does not divide {} input channels'.format(groups, c_in))
    if w.shape[0] % groups != 0:
        raise ShapeError('groups={} does not divide {} output channels'.format(groups, w.shape[0]))
    if w.shape[1] * groups != c_in:
        raise ShapeError('Kernel expects {} input channels per group but input has {} channels in {} groups'
                         .format(w.shape[1], c_in, groups))
    if stride < 1 or dilation < 1:
        raise ShapeError('stride and dilation must be >= 1 (stride={}, dilation={})'.format(stride, dilation))
    if pad < 0:
        raise ShapeError('pad must be >= 0 but is {}'.format(pad))


def _windows(x: np.ndarray, k: int, stride: int, dilation: int, groups: int, pad: int) -> np.ndarray:
    """
    Grouped sliding windows [n, groups, c_in/groups, oh, ow, k, k] of the zero padded input.
    """
    n, c_in, h, w = x.shape
    oh = conv_output_size(h, k, stride, dilation, pad)
    ow = conv_output_size(w, k, stride, dilation, pad)
    if oh < 1 or ow < 1:
        raise ShapeError('Input {}x{} too small for kernel {} with dilation {} and pad {}'
                         .format(h, w, k, dilation, pad))
    span = dilation * (k - 1) + 1
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    view = sliding_window_view(padded, (span, span), axis=(2, 3))
    view = view[:, :, ::stride, ::stride, ::dilation, ::dilation][:, :, :oh, :ow]
    return view.reshape(n, groups, c_in // groups, oh, ow, k, k)


def conv2d(x: Tensor, w: Tensor, bias: Optional[np.ndarray] = None, stride: int = 1, dilation: int = 1,
           groups: int = 1, pad: int = 0) -> Tensor:
    x = as_tensor(x, 'conv2d input')
    _check_conv_args(x.shape[1], w, stride, dilation, groups, pad)
    c_out, c_in_group, k, _ = w.shape
    n = x.shape[0]
    windows = _windows(x, k, stride, dilation, groups, pad)
    w_grouped = w.reshape(groups, c_out // groups, c_in_group, k, k)
    out = np.einsum('ngcxyij,gocij->ngoxy', windows, w_grouped, optimize=True)
    out = out.reshape(n, c_out, out.shape[-2], out.shape[-1])
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64).reshape(1, c_out, 1, 1)
    return out


def conv2d_weight_grad(x: Tensor, grad_out: Tensor, kernel: int, stride: int = 1, dilation: int = 1,
                       groups: int = 1, pad: int = 0) -> np.ndarray:
    """
    Gradient of <conv2d(x, w), grad_out> with respect to w.
    """
    n, c_out, oh, ow = grad_out.shape
    windows = _windows(x, kernel, stride, dilation, groups, pad)
    g = grad_out.reshape(n, groups, c_out // groups, oh, ow)
    dw = np.einsum('ngoxy,ngcxyij->gocij', g, windows, optimize=True)
    return dw.reshape(c_out, x.shape[1] // groups, kernel, kernel)


def conv_transpose2d(y: Tensor, w: Tensor, bias: Optional[np.ndarray] = None, stride: int = 1, pad: int = 0,
                     groups: int = 1, dilation: int = 1,
                     output_size: Optional[Tuple[int, int]] = None) -> Tensor:
    """
    Exact adjoint of conv2d with the same weight, stride, pad, dilation and groups.

    The weight keeps the forward layout [c_out, c_in/groups, k, k]; the result has
    c_in channels. output_size picks the spatial size when the forward floor is ambiguous.
    """
    y = as_tensor(y, 'conv_transpose2d input')
    n, c_out, oh, ow = y.shape
    if w.ndim != 4 or w.shape[0] != c_out:
        raise ShapeError('Kernel {} does not match {} input channels of the transpose convolution'
                         .format(w.shape, c_out))
    c_in = w.shape[1] * groups
    _check_conv_args(c_in, w, stride, dilation, groups, pad)
    k = w.shape[2]
    if output_size is None:
        h = (oh - 1) * stride - 2 * pad + dilation * (k - 1) + 1
        wd = (ow - 1) * stride - 2 * pad + dilation * (k - 1) + 1
    else:
        h, wd = output_size
        if conv_output_size(h, k, stride, dilation, pad) != oh or conv_output_size(wd, k, stride, dilation,
                                                                                   pad) != ow:
            raise ShapeError('output_size {} is inconsistent with input {}x{}'.format(output_size, oh, ow))
    if h < 1 or wd < 1:
        raise ShapeError('Transpose convolution would produce empty output {}x{}'.format(h, wd))
    c_in_group = w.shape[1]
    y_grouped = y.reshape(n, groups, c_out // groups, oh, ow)
    w_grouped = w.reshape(groups, c_out // groups, c_in_group, k, k)
    columns = np.einsum('ngoxy,gocij->ngcijxy', y_grouped, w_grouped, optimize=True)
    out = np.zeros((n, groups, c_in_group, h + 2 * pad, wd + 2 * pad))
    row_span = stride * (oh - 1) + 1
    col_span = stride * (ow - 1) + 1
    for i in range(k):
        for j in range(k):
            r0 = i * dilation
            c0 = j * dilation
            out[:, :, :, r0:r0 + row_span:stride, c0:c0 + col_span:stride] += columns[:, :, :, i, j]
    out = out.reshape(n, c_in, h + 2 * pad, wd + 2 * pad)[:, :, pad:pad + h, pad:pad + wd]
    out = np.ascontiguousarray(out)
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64).reshape(1, c_in, 1, 1)
    return out


def fft2(x: Tensor) -> Spectrum:
    x = as_tensor(x, 'fft2 input')
    return Spectrum.from_complex(scipy.fft.fft2(x, axes=(-2, -1), norm='ortho'))


def ifft2_complex(s: Spectrum) -> np.ndarray:
    return scipy.fft.ifft2(s.to_complex(), axes=(-2, -1), norm='ortho')


def ifft2(s: Spectrum) -> Tensor:
    return np.ascontiguousarray(ifft2_complex(s).real)


def _pad_indices(size: int, p: int, mode: str) -> np.ndarray:
    index = np.arange(-p, size + p)
    if mode == 'replicate':
        return np.clip(index, 0, size - 1)
    if size < 2:
        return np.zeros_like(index)
    period = 2 * (size - 1)
    index = np.mod(index, period)
    return np.where(index >= size, period - index, index)


def pad(x: Tensor, p: int, mode: str = 'zero') -> Tensor:
    if mode not in PAD_MODES:
        raise ShapeError('Unknown pad mode {} (expected one of {})'.format(mode, PAD_MODES))
    if p == 0:
        return np.array(x, dtype=np.float64)
    if mode == 'zero':
        return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    h, w = x.shape[-2:]
    if mode == 'reflect' and p >= max(h, w):
        raise ShapeError('Reflect pad {} needs a spatial size above {}x{}'.format(p, h, w))
    rows = _pad_indices(h, p, mode)
    cols = _pad_indices(w, p, mode)
    return x[:, :, rows[:, None], cols[None, :]]


def pad_adjoint(g: Tensor, p: int, mode: str = 'zero') -> Tensor:
    """
    Scatter a gradient of pad(x, p, mode) back onto x.
    """
    if p == 0:
        return np.array(g, dtype=np.float64)
    hp, wp = g.shape[-2:]
    h, w = hp - 2 * p, wp - 2 * p
    if mode == 'zero':
        return np.ascontiguousarray(g[:, :, p:p + h, p:p + w])
    rows = _pad_indices(h, p, mode)
    cols = _pad_indices(w, p, mode)
    folded_rows = np.zeros(g.shape[:2] + (h, wp))
    np.add.at(folded_rows, (slice(None), slice(None), rows), g)
    out = np.zeros(g.shape[:2] + (h, w))
    np.add.at(out, (slice(None), slice(None), slice(None), cols), folded_rows)
    return out


def crop(x: Tensor, top: int, left: int, height: int, width: int) -> Tensor:
    if top < 0 or left < 0 or top + height > x.shape[2] or left + width > x.shape[3]:
        raise ShapeError('Crop {}x{} at ({}, {}) falls outside {}x{}'
                         .format(height, width, top, left, x.shape[2], x.shape[3]))
    return np.ascontiguousarray(x[:, :, top:top + height, left:left + width])


def sobel_components(x: Tensor) -> Tuple[Tensor, Tensor]:
    x = as_tensor(x, 'sobel input')
    if x.shape[1] != 1:
        raise ShapeError('Sobel gradient expects a single channel but got {}'.format(x.shape[1]))
    padded = pad(x, 1, 'replicate')
    gx = conv2d(padded, SOBEL_X.reshape(1, 1, 3, 3))
    gy = conv2d(padded, SOBEL_Y.reshape(1, 1, 3, 3))
    return gx, gy


def sobel_grad(x: Tensor) -> Tensor:
    gx, gy = sobel_components(x)
    return np.sqrt(gx ** 2 + gy ** 2)


def add(a: Tensor, b: Tensor) -> Tensor:
    return np.add(a, b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return np.multiply(a, b)


def maximum(a: Tensor, b: Tensor) -> Tensor:
    return np.maximum(a, b)


def sigmoid(x: Tensor) -> Tensor:
    return expit(x)


def silu(x: Tensor) -> Tensor:
    return x * expit(x)


def tanh(x: Tensor) -> Tensor:
    return np.tanh(x)


def linear(x: Tensor, w: np.ndarray, bias: Optional[np.ndarray] = None) -> Tensor:
    """
    Per-pixel channel projection: w is [c_out, c_in].
    """
    if w.ndim != 2 or w.shape[1] != x.shape[1]:
        raise ShapeError('Projection {} does not accept {} channels'.format(w.shape, x.shape[1]))
    out = np.einsum('oc,nchw->nohw', w, x, optimize=True)
    if bias is not None:
        out = out + bias.reshape(1, -1, 1, 1)
    return out


def layer_norm(x: Tensor, scale: np.ndarray, offset: np.ndarray, eps: float = 1e-5) -> Tensor:
    """
    Normalize across channels at every pixel.
    """
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    normed = (x - mean) / np.sqrt(var + eps)
    return normed * scale.reshape(1, -1, 1, 1) + offset.reshape(1, -1, 1, 1)


def concat_channels(tensors: Sequence[Tensor]) -> Tensor:
    shapes = {(t.shape[0],) + tuple(t.shape[2:]) for t in tensors}
    if len(shapes) != 1:
        raise ShapeError('Cannot concatenate tensors of shapes {}'.format([t.shape for t in tensors]))
    return np.concatenate(tensors, axis=1)


def split_channels(x: Tensor, sizes: Sequence[int]) -> Tuple[Tensor, ...]:
    if sum(sizes) != x.shape[1]:
        raise ShapeError('Split sizes {} do not sum to {} channels'.format(list(sizes), x.shape[1]))
    bounds = np.cumsum([0] + list(sizes))
    return tuple(np.ascontiguousarray(x[:, bounds[i]:bounds[i + 1]]) for i in range(len(sizes)))
