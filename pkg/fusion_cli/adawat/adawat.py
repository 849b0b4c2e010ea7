"""
Adaptive approximate wavelet transform.

Two learnable analysis vectors u0 (low-pass) and u1 (high-pass) generate the
four separable 2-D kernels LL = u0 u0^T, LH = u0 u1^T, HL = u1 u0^T and
HH = u1 u1^T. Applied depthwise with stride 2 they split a feature map into
four half-resolution subbands. The inverse sums the transpose convolutions of
every subband with kernels built from an independent synthesis pair.
"""
from typing import Dict, Tuple

import numpy as np
import pywt

from ..autodiff import ops
from ..autodiff.params import ParamSet
from ..autodiff.tape import Node, record
from ..errors import ShapeError
from ..tensor import core

BANDS = ('ll', 'lh', 'hl', 'hh')
BAND_VECTORS = {'ll': (0, 0), 'lh': (0, 1), 'hl': (1, 0), 'hh': (1, 1)}
ENHANCEMENT_LEAVES = {'ll': 'dconv_lo', 'lh': 'dconv_lh', 'hl': 'dconv_hl', 'hh': 'dconv_hh'}
INIT_WAVELETS = {2: 'haar', 4: 'db2'}
LOW_DILATION = 3
HIGH_DILATION = 1


class AnalysisVectors(object):
    def __init__(self, u0, u1):
        self.u0 = np.asarray(u0, dtype=np.float64)
        self.u1 = np.asarray(u1, dtype=np.float64)
        if self.u0.shape != self.u1.shape or self.u0.ndim != 1:
            raise ShapeError('Analysis vectors must be 1-D of equal length: {} vs {}'
                             .format(self.u0.shape, self.u1.shape))

    @property
    def length(self) -> int:
        return self.u0.size

    def __repr__(self):
        return 'AnalysisVectors(u0={}, u1={})'.format(self.u0.tolist(), self.u1.tolist())


class WaveletKernels(object):
    def __init__(self, ll: np.ndarray, lh: np.ndarray, hl: np.ndarray, hh: np.ndarray):
        self.ll = ll
        self.lh = lh
        self.hl = hl
        self.hh = hh

    def band(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def __repr__(self):
        return 'WaveletKernels(length={})'.format(self.ll.shape[0])


class SubbandSet(object):
    """
    The four subbands of one feature map; entries are Nodes or arrays of equal shape.
    """

    def __init__(self, ll, lh, hl, hh):
        self.ll = ll
        self.lh = lh
        self.hl = hl
        self.hh = hh
        shapes = {tuple(np.shape(b.value if isinstance(b, Node) else b)) for b in self.bands()}
        if len(shapes) != 1:
            raise ShapeError('Subbands disagree in shape: {}'.format(sorted(shapes)))

    def bands(self) -> Tuple:
        return self.ll, self.lh, self.hl, self.hh

    @property
    def shape(self) -> Tuple[int, ...]:
        first = self.ll.value if isinstance(self.ll, Node) else self.ll
        return tuple(first.shape)

    def __repr__(self):
        return 'SubbandSet(shape={})'.format(self.shape)


class AdaWatParams(ParamSet):
    """
    Analysis and synthesis vector pairs plus the depthwise dilated enhancement kernels.
    """

    def __init__(self, channels: int, length: int = 2, adaptive: bool = True, prefix: str = 'adawat'):
        super().__init__(prefix)
        init = analysis_init(length)
        self.channels = channels
        self.length = length
        self.u0 = self.leaf('u0', init.u0)
        self.u1 = self.leaf('u1', init.u1)
        self.dconv_lo = self.leaf('dconv_lo', np.zeros((channels, 1, 3, 3)))
        self.dconv_lh = self.leaf('dconv_lh', np.zeros((channels, 1, 3, 3)))
        self.dconv_hl = self.leaf('dconv_hl', np.zeros((channels, 1, 3, 3)))
        self.dconv_hh = self.leaf('dconv_hh', np.zeros((channels, 1, 3, 3)))
        self.s0 = self.leaf('synthesis_u0', init.u0)
        self.s1 = self.leaf('synthesis_u1', init.u1)
        if not adaptive:
            for param in (self.u0, self.u1, self.s0, self.s1):
                param.requires_grad = False

    def analysis(self) -> AnalysisVectors:
        return AnalysisVectors(self.u0.value, self.u1.value)

    def synthesis(self) -> AnalysisVectors:
        return AnalysisVectors(self.s0.value, self.s1.value)

    def enhancement(self, band: str) -> Node:
        if band not in BANDS:
            raise ShapeError('Unknown subband {}; expected one of {}'.format(band, BANDS))
        return getattr(self, ENHANCEMENT_LEAVES[band])


def analysis_init(length: int = 2) -> AnalysisVectors:
    """
    Orthonormal starting pair: Haar for length 2, Daubechies-2 for length 4.
    """
    if length not in INIT_WAVELETS:
        raise ShapeError('Wavelet kernel length must be one of {} but is {}'.format(sorted(INIT_WAVELETS), length))
    wavelet = pywt.Wavelet(INIT_WAVELETS[length])
    return AnalysisVectors(wavelet.rec_lo, wavelet.rec_hi)


def haar_init() -> AnalysisVectors:
    return analysis_init(2)


def build_kernels(v: AnalysisVectors) -> WaveletKernels:
    if v.length < 2:
        raise ShapeError('Wavelet kernels need length >= 2 but got {}'.format(v.length))
    u = (v.u0, v.u1)
    return WaveletKernels(*(np.outer(u[BAND_VECTORS[b][0]], u[BAND_VECTORS[b][1]]) for b in BANDS))


def depthwise_kernel(rows: Node, cols: Node, channels: int) -> Node:
    """
    The outer product rows cols^T replicated to a [channels, 1, L, L] depthwise weight.
    """
    kernel = np.outer(rows.value, cols.value)
    weight = np.broadcast_to(kernel, (channels, 1) + kernel.shape).copy()

    def vjp(g):
        folded = g.sum(axis=(0, 1))
        return folded @ cols.value, folded.T @ rows.value

    return record(weight, (rows, cols), vjp)


def _band_pad(length: int) -> int:
    if length % 2:
        raise ShapeError('Wavelet kernel length must be even but is {}'.format(length))
    return (length - 2) // 2


def adawat_forward(f, p: AdaWatParams, enhance: bool = True) -> SubbandSet:
    """
    Split f [n, C, h, w] into four [n, C, h/2, w/2] subbands.
    """
    f = ops.lift(f)
    n, c, h, w = f.shape
    if h % 2 or w % 2:
        raise ShapeError('AdaWAT needs even spatial sizes but got {}x{}; pad the input first'.format(h, w))
    if c != p.channels:
        raise ShapeError('AdaWAT configured for {} channels but input has {}'.format(p.channels, c))
    pad = _band_pad(p.length)
    vectors = (p.u0, p.u1)
    bands = {}
    for band in BANDS:
        a, b = BAND_VECTORS[band]
        weight = depthwise_kernel(vectors[a], vectors[b], c)
        out = ops.conv2d(f, weight, stride=2, groups=c, pad=pad)
        if enhance:
            dilation = LOW_DILATION if band == 'll' else HIGH_DILATION
            out = ops.add(out, ops.conv2d(out, p.enhancement(band), dilation=dilation, groups=c, pad=dilation))
        bands[band] = out
    return SubbandSet(**bands)


def adaiwat(s: SubbandSet, p: AdaWatParams) -> Node:
    """
    Recouple four subbands [n, C, h, w] into [n, C, 2h, 2w].
    """
    n, c, h, w = s.shape
    if c != p.channels:
        raise ShapeError('AdaIWAT configured for {} channels but subbands have {}'.format(p.channels, c))
    pad = _band_pad(p.length)
    vectors = (p.s0, p.s1)
    out = None
    for band, value in zip(BANDS, s.bands()):
        a, b = BAND_VECTORS[band]
        weight = depthwise_kernel(vectors[a], vectors[b], c)
        part = ops.conv_transpose2d(value, weight, stride=2, pad=pad, groups=c, output_size=(2 * h, 2 * w))
        out = part if out is None else ops.add(out, part)
    return out


def decompose_image(x: np.ndarray, v: AnalysisVectors) -> Dict[str, np.ndarray]:
    """
    Apply the analysis kernels to every channel of x without enhancement.
    """
    x = core.as_tensor(x, 'decompose input')
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError('Decomposition needs even spatial sizes but got {}x{}'.format(h, w))
    kernels = build_kernels(v)
    pad = _band_pad(v.length)
    out = {}
    for band in BANDS:
        weight = np.broadcast_to(kernels.band(band), (c, 1, v.length, v.length))
        out[band] = core.conv2d(x, np.ascontiguousarray(weight), stride=2, groups=c, pad=pad)
    return out
