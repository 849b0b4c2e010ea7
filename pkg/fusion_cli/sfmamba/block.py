"""
Spatial-frequency state-space block.

    u     = LN(l_in)
    lp    = W_in u
    L_S   = SiLU(depthwise 3x3 conv(lp))
    L_T   = frequency filter(lp, sigmoid(lambda_raw))
    X, B, C, A_raw = split(L_S + L_T)
    Y     = 2-D scan(X, sigmoid(A_raw), B, C)
    l_mid = l_in + W_out (Y * SiLU(W_gate u))
    l_out = l_mid + MLP(LN(l_mid))
"""
from typing import Dict, Optional

import numpy as np

from ..autodiff import ops
from ..autodiff.params import ParamSet, fan_in_normal
from ..autodiff.tape import Node
from ..errors import ConfigError, ShapeError
from .freq_filter import DEFAULT_SHARPNESS, MASK_MODES, freq_branch
from .scan import SCAN_MODES, ScanDirections, ssd2d_scan

LAMBDA_INIT = -2.0


class BlockOptions(object):
    """
    Forward-time switches shared by every block of a model.
    """

    def __init__(self, mask_mode: str = 'hard', k_sharp: float = DEFAULT_SHARPNESS, spatial_branch: bool = True,
                 freq_branch: bool = True, scan: str = '2d'):
        if mask_mode not in MASK_MODES:
            raise ConfigError('Unknown mask mode {} (expected one of {})'.format(mask_mode, MASK_MODES))
        if scan not in SCAN_MODES:
            raise ConfigError('Unknown scan mode {} (expected one of {})'.format(scan, SCAN_MODES))
        self.mask_mode = mask_mode
        self.k_sharp = k_sharp
        self.spatial_branch = spatial_branch
        self.freq_branch = freq_branch
        self.scan = scan

    def __repr__(self):
        return 'BlockOptions(mask_mode={}, spatial={}, freq={}, scan={})'.format(
            self.mask_mode, self.spatial_branch, self.freq_branch, self.scan)


class SsdBlockParams(ParamSet):
    def __init__(self, width: int, c_prime: int, groups: int, d: int, mlp_ratio: int,
                 rng: np.random.Generator, prefix: str = 'block'):
        super().__init__(prefix)
        if c_prime % groups != 0:
            raise ShapeError('C\' = {} is not divisible into {} groups'.format(c_prime, groups))
        self.width = width
        self.c_prime = c_prime
        self.groups = groups
        self.d = d
        projected = self.projected_width
        hidden = mlp_ratio * width

        self.norm1_scale = self.leaf('norm1_scale', np.ones(width))
        self.norm1_offset = self.leaf('norm1_offset', np.zeros(width))
        self.w_in = self.leaf('w_in', fan_in_normal(rng, (projected, width), width))
        self.b_in = self.leaf('b_in', np.zeros(projected))
        identity = np.zeros((projected, 1, 3, 3))
        identity[:, 0, 1, 1] = 1.0
        self.w_se = self.leaf('w_se', identity)
        self.b_se = self.leaf('b_se', np.zeros(projected))
        self.lambda_raw = self.leaf('lambda_raw', np.full(1, LAMBDA_INIT))
        self.w_gate = self.leaf('w_gate', fan_in_normal(rng, (c_prime, width), width))
        self.b_gate = self.leaf('b_gate', np.zeros(c_prime))
        self.w_out = self.leaf('w_out', np.zeros((width, c_prime)))
        self.b_out = self.leaf('b_out', np.zeros(width))
        self.norm2_scale = self.leaf('norm2_scale', np.ones(width))
        self.norm2_offset = self.leaf('norm2_offset', np.zeros(width))
        self.w_mlp1 = self.leaf('w_mlp1', fan_in_normal(rng, (hidden, width), width))
        self.b_mlp1 = self.leaf('b_mlp1', np.zeros(hidden))
        self.w_mlp2 = self.leaf('w_mlp2', np.zeros((width, hidden)))
        self.b_mlp2 = self.leaf('b_mlp2', np.zeros(width))

    @property
    def projected_width(self) -> int:
        return 2 * self.c_prime + 2 * self.groups * self.d

    def threshold(self) -> Node:
        return ops.sigmoid(self.lambda_raw)


def spatial_branch(lp, w_se, b_se=None) -> Node:
    """
    SiLU of a depthwise 3x3 convolution, shape preserving.
    """
    lp, w_se = ops.lift(lp), ops.lift(w_se)
    if w_se.shape[0] != lp.shape[1]:
        raise ShapeError('Spatial kernel {} does not match {} projected channels'.format(w_se.shape, lp.shape[1]))
    return ops.silu(ops.conv2d(lp, w_se, b_se, groups=lp.shape[1], pad=1))


def split_xbca(ls, lt, c_prime: int, g: int, d: int) -> Dict[str, Node]:
    """
    Add the two branches and split channels into X, B, C and A = sigmoid(A_raw).
    """
    ls = ops.lift(ls)
    fused = ls if lt is None else ops.add(ls, lt)
    expected = 2 * c_prime + 2 * g * d
    if fused.shape[1] != expected:
        raise ShapeError('Projection has {} channels but the split needs 2 x {} + 2 x {} x {} = {}'
                         .format(fused.shape[1], c_prime, g, d, expected))
    x, b, c, a_raw = ops.split_channels(fused, (c_prime, g * d, g * d, c_prime))
    return {'X': x, 'B': b, 'C': c, 'A': ops.sigmoid(a_raw)}


def _mlp(x, p: SsdBlockParams) -> Node:
    hidden = ops.silu(ops.linear(x, p.w_mlp1, p.b_mlp1))
    return ops.linear(hidden, p.w_mlp2, p.b_mlp2)


def block_forward(l_in, p: SsdBlockParams, options: Optional[BlockOptions] = None) -> Node:
    options = options or BlockOptions()
    l_in = ops.lift(l_in)
    if l_in.shape[1] != p.width:
        raise ShapeError('Block of width {} received {} channels'.format(p.width, l_in.shape[1]))

    u = ops.layer_norm(l_in, p.norm1_scale, p.norm1_offset)
    lp = ops.linear(u, p.w_in, p.b_in)
    ls = spatial_branch(lp, p.w_se, p.b_se) if options.spatial_branch else lp
    lt = freq_branch(lp, p.threshold(), options.mask_mode, options.k_sharp) if options.freq_branch else None
    parts = split_xbca(ls, lt, p.c_prime, p.groups, p.d)
    y = ssd2d_scan(parts['X'], parts['A'], parts['B'], parts['C'], groups=p.groups, d=p.d,
                   dirs=ScanDirections.ALL, mode=options.scan)

    gated = ops.mul(y, ops.silu(ops.linear(u, p.w_gate, p.b_gate)))
    l_mid = ops.add(l_in, ops.linear(gated, p.w_out, p.b_out))
    return ops.add(l_mid, _mlp(ops.layer_norm(l_mid, p.norm2_scale, p.norm2_offset), p))
