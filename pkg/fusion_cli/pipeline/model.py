"""
End-to-end two-source fusion network.

    stem (shared)      [n, 1, H, W]   -> [n, C, H/2, W/2]
    AdaWAT (shared)    [n, C, H/2, .] -> 4 x [n, C, H/4, W/4]
    band fusion        hi = 3C channels, lo = C channels
    shallow blocks     N1 on hi, N1 on lo
    AdaIWAT            -> [n, C, H/2, W/2]
    deep blocks        N2 at H/2
    head               -> [n, 1, H, W] in [0, 1]
"""
from typing import Tuple

import numpy as np

from ..adawat.adawat import AdaWatParams, SubbandSet, adaiwat, adawat_forward
from ..autodiff import ops
from ..autodiff.params import ParamSet, fan_in_normal
from ..autodiff.tape import Node
from ..errors import ShapeError
from ..sfmamba.block import BlockOptions, SsdBlockParams, block_forward
from ..tensor import core
from .config import FusionConfig

SIZE_MULTIPLE = 4
# spatial padding of the stem and head convolutions; flat inputs stay flat
BORDER = 'reflect'


class ModelParams(ParamSet):
    def __init__(self, cfg: FusionConfig):
        super().__init__('')
        rng = np.random.default_rng(cfg.seed)
        c = cfg.channels
        cp = cfg.resolved_c_prime
        self.config = cfg

        self.stem_w = self.leaf('stem.w', fan_in_normal(rng, (c, 1, 3, 3), 9))
        self.stem_b = self.leaf('stem.b', np.zeros(c))
        self.adawat = self.child('adawat', AdaWatParams(c, cfg.wavelet_length, cfg.adaptive_wavelet))

        def blocks(kind, count, width):
            return [self.child('{}.{}'.format(kind, i),
                               SsdBlockParams(width, cp, cfg.groups, cfg.state_dim, cfg.mlp_ratio, rng,
                                              prefix='{}.{}'.format(kind, i)))
                    for i in range(count)]

        self.hi_blocks = blocks('hi', cfg.n1, 3 * c)
        self.lo_blocks = blocks('lo', cfg.n1, c)
        self.deep_blocks = blocks('deep', cfg.n2, c)

        self.head_up_w = self.leaf('head.up_w', fan_in_normal(rng, (c, c // 2, 2, 2), c))
        self.head_up_b = self.leaf('head.up_b', np.zeros(c // 2))
        self.head_out_w = self.leaf('head.out_w', fan_in_normal(rng, (1, c // 2, 3, 3), 9 * (c // 2)))
        self.head_out_b = self.leaf('head.out_b', np.zeros(1))


def param_count(p: ModelParams) -> int:
    return p.param_count()


def _stage(x: Node, stage: str) -> Node:
    core.check_finite(x.value, stage)
    return x


def embed(i, p: ModelParams) -> Node:
    """
    Shared 3x3 stride-2 stem over a reflect-padded input, followed by SiLU.
    """
    i = ops.lift(i)
    if len(i.shape) != 4 or i.shape[1] != 1:
        raise ShapeError('Fusion inputs must be single channel [n, 1, H, W] but got {}'.format(i.shape))
    height, width = i.shape[2:]
    if height % SIZE_MULTIPLE or width % SIZE_MULTIPLE:
        raise ShapeError('Input {}x{} is not divisible by {}; pad it to a multiple first'
                         .format(height, width, SIZE_MULTIPLE))
    return ops.silu(ops.conv2d(ops.pad(i, 1, BORDER), p.stem_w, p.stem_b, stride=2))


def freq_segmented_fuse(s1: SubbandSet, s2: SubbandSet) -> Tuple[Node, Node]:
    """
    :return: hi (summed LH, HL, HH stacked on channels) and lo (summed LL).
    """
    if s1.shape != s2.shape:
        raise ShapeError('Subbands of the two sources disagree: {} vs {}'.format(s1.shape, s2.shape))
    hi = ops.concat_channels([ops.add(s1.lh, s2.lh), ops.add(s1.hl, s2.hl), ops.add(s1.hh, s2.hh)])
    lo = ops.add(s1.ll, s2.ll)
    return hi, lo


def block_options(cfg: FusionConfig, mask_mode: str) -> BlockOptions:
    return BlockOptions(mask_mode=mask_mode, k_sharp=cfg.k_sharp, spatial_branch=cfg.spatial_branch,
                        freq_branch=cfg.freq_branch, scan=cfg.scan)


def head(f: Node, p: ModelParams) -> Node:
    up = ops.silu(ops.conv_transpose2d(f, p.head_up_w, p.head_up_b, stride=2))
    out = ops.conv2d(ops.pad(up, 1, BORDER), p.head_out_w, p.head_out_b)
    return ops.scale(ops.add(ops.tanh(out), 1.0), 0.5)


def fuse(i1, i2, p: ModelParams, cfg: FusionConfig, mask_mode: str = 'hard') -> Node:
    i1, i2 = ops.lift(i1), ops.lift(i2)
    if i1.shape != i2.shape:
        raise ShapeError('Sources must share a shape but got {} and {}'.format(i1.shape, i2.shape))
    options = block_options(cfg, mask_mode)
    c = cfg.channels

    f1 = _stage(embed(i1, p), 'embed')
    f2 = _stage(embed(i2, p), 'embed')
    s1 = adawat_forward(f1, p.adawat, cfg.enhance)
    s2 = adawat_forward(f2, p.adawat, cfg.enhance)
    hi, lo = freq_segmented_fuse(s1, s2)
    hi, lo = _stage(hi, 'adawat'), _stage(lo, 'adawat')

    for index, params in enumerate(p.hi_blocks):
        hi = _stage(block_forward(hi, params, options), 'hi.{}'.format(index))
    for index, params in enumerate(p.lo_blocks):
        lo = _stage(block_forward(lo, params, options), 'lo.{}'.format(index))

    lh, hl, hh = ops.split_channels(hi, (c, c, c))
    f = _stage(adaiwat(SubbandSet(lo, lh, hl, hh), p.adawat), 'adaiwat')
    for index, params in enumerate(p.deep_blocks):
        f = _stage(block_forward(f, params, options), 'deep.{}'.format(index))
    return _stage(head(f, p), 'head')
