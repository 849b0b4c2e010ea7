"""
Grouped selective state-space scan over a 2-D grid.

For one scan line the state of channel c in group g is a d-vector:

    h_t = A_t[c] * h_{t-1} + B_t[g] * x_t[c]
    y_t[c] = <C_t[g], h_t>

Every row (LR, RL) or column (TB, BT) starts from a zero state. The four
directional outputs are summed in the order LR, RL, TB, BT and scaled by 1/4.
"""
from typing import Sequence, Tuple

import numpy as np

from ..autodiff import ops
from ..autodiff.tape import Node, record
from ..errors import ShapeError

SCAN_MODES = ('2d', '1d')


class ScanDirections(object):
    LR = 'LR'
    RL = 'RL'
    TB = 'TB'
    BT = 'BT'
    ALL = (LR, RL, TB, BT)

    @staticmethod
    def to_lines(x: np.ndarray, direction: str) -> np.ndarray:
        """
        Rearrange x so the scan runs along the last axis, one line per row.
        """
        if direction == ScanDirections.LR:
            return x
        if direction == ScanDirections.RL:
            return np.flip(x, axis=-1)
        if direction == ScanDirections.TB:
            return np.swapaxes(x, -1, -2)
        if direction == ScanDirections.BT:
            return np.flip(np.swapaxes(x, -1, -2), axis=-1)
        raise ShapeError('Unknown scan direction {} (expected one of {})'.format(direction, ScanDirections.ALL))

    @staticmethod
    def from_lines(x: np.ndarray, direction: str) -> np.ndarray:
        if direction == ScanDirections.LR:
            return x
        if direction == ScanDirections.RL:
            return np.flip(x, axis=-1)
        if direction == ScanDirections.TB:
            return np.swapaxes(x, -1, -2)
        if direction == ScanDirections.BT:
            return np.swapaxes(np.flip(x, axis=-1), -1, -2)
        raise ShapeError('Unknown scan direction {} (expected one of {})'.format(direction, ScanDirections.ALL))


def _grouped(x: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray, groups: int):
    n, channels, rows, length = x.shape
    state = b.shape[1] // groups
    per_group = channels // groups
    return (x.reshape(n, groups, per_group, rows, length),
            a.reshape(n, groups, per_group, rows, length),
            b.reshape(n, groups, state, rows, length),
            c.reshape(n, groups, state, rows, length))


def scan_lines(x: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray,
               groups: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scan every row of [n, ch, rows, length] arrays left to right with a zero start state.

    :return: y with the shape of x and the states [n, groups, ch/groups, d, rows, length].
    """
    xg, ag, bg, cg = _grouped(x, a, b, c, groups)
    n, g, per_group, rows, length = xg.shape
    state = bg.shape[2]
    states = np.zeros((n, g, per_group, state, rows, length))
    y = np.zeros(xg.shape)
    h = np.zeros((n, g, per_group, state, rows))
    for t in range(length):
        h = ag[..., t][:, :, :, None, :] * h + bg[..., t][:, :, None, :, :] * xg[..., t][:, :, :, None, :]
        states[..., t] = h
        y[..., t] = np.einsum('ngkdr,ngdr->ngkr', h, cg[..., t], optimize=True)
    return y.reshape(x.shape), states


def scan_lines_vjp(gy: np.ndarray, x: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray,
                   states: np.ndarray, groups: int):
    """
    Reverse pass of scan_lines.

    :return: gradients with respect to x, a, b and c.
    """
    xg, ag, bg, cg = _grouped(x, a, b, c, groups)
    gyg = gy.reshape(xg.shape)
    length = xg.shape[-1]
    dx = np.zeros(xg.shape)
    da = np.zeros(ag.shape)
    db = np.zeros(bg.shape)
    dc = np.zeros(cg.shape)
    dh = np.zeros(states.shape[:-1])
    for t in reversed(range(length)):
        h = states[..., t]
        dh = dh + gyg[..., t][:, :, :, None, :] * cg[..., t][:, :, None, :, :]
        dc[..., t] = np.einsum('ngkr,ngkdr->ngdr', gyg[..., t], h, optimize=True)
        if t > 0:
            da[..., t] = np.einsum('ngkdr,ngkdr->ngkr', dh, states[..., t - 1], optimize=True)
        db[..., t] = np.einsum('ngkdr,ngkr->ngdr', dh, xg[..., t], optimize=True)
        dx[..., t] = np.einsum('ngkdr,ngdr->ngkr', dh, bg[..., t], optimize=True)
        dh = ag[..., t][:, :, :, None, :] * dh
    return dx.reshape(x.shape), da.reshape(a.shape), db.reshape(b.shape), dc.reshape(c.shape)


def _check_scan_args(x, a, b, c, groups: int, d: int):
    if x.shape != a.shape:
        raise ShapeError('X {} and A {} must share a shape'.format(x.shape, a.shape))
    if b.shape != c.shape:
        raise ShapeError('B {} and C {} must share a shape'.format(b.shape, c.shape))
    if groups < 1 or x.shape[1] % groups != 0:
        raise ShapeError('{} scan channels are not divisible into {} groups'.format(x.shape[1], groups))
    if b.shape[1] != groups * d:
        raise ShapeError('B and C need {} x {} = {} channels but have {}'.format(groups, d, groups * d, b.shape[1]))
    if b.shape[0] != x.shape[0] or b.shape[2:] != x.shape[2:]:
        raise ShapeError('B {} does not cover the grid of X {}'.format(b.shape, x.shape))


def ssd2d_scan(x, a, b, c, groups: int = 1, d: int = None, dirs: Sequence[str] = ScanDirections.ALL,
               mode: str = '2d') -> Node:
    """
    Average of the directional scans of X [n, C', h, w] driven by A, B and C.

    mode '1d' flattens the grid and runs a single left-to-right scan without resets.
    """
    x, a, b, c = ops.lift(x), ops.lift(a), ops.lift(b), ops.lift(c)
    if d is None:
        d = b.shape[1] // groups
    _check_scan_args(x.value, a.value, b.value, c.value, groups, d)
    if mode not in SCAN_MODES:
        raise ShapeError('Unknown scan mode {} (expected one of {})'.format(mode, SCAN_MODES))
    n, channels, height, width = x.shape

    if mode == '1d':
        def flat(v):
            return v.reshape(v.shape[0], v.shape[1], 1, height * width)

        y, states = scan_lines(flat(x.value), flat(a.value), flat(b.value), flat(c.value), groups)

        def vjp_flat(g):
            grads = scan_lines_vjp(flat(g), flat(x.value), flat(a.value), flat(b.value), flat(c.value),
                                   states, groups)
            return tuple(grad.reshape(node.shape) for grad, node in zip(grads, (x, a, b, c)))

        return record(y.reshape(x.shape), (x, a, b, c), vjp_flat)

    if not dirs:
        raise ShapeError('At least one scan direction is required')
    weight = 1.0 / len(dirs)
    lines = []
    out = np.zeros(x.shape)
    for direction in dirs:
        operands = [np.ascontiguousarray(ScanDirections.to_lines(v.value, direction)) for v in (x, a, b, c)]
        y, states = scan_lines(*operands, groups)
        out = out + ScanDirections.from_lines(y, direction)
        lines.append((direction, operands, states))
    out = out * weight

    def vjp(g):
        grads = [np.zeros(node.shape) for node in (x, a, b, c)]
        for direction, operands, states in lines:
            gy = np.ascontiguousarray(ScanDirections.to_lines(g * weight, direction))
            for i, grad in enumerate(scan_lines_vjp(gy, *operands, states, groups)):
                grads[i] = grads[i] + ScanDirections.from_lines(grad, direction)
        return tuple(grads)

    return record(out, (x, a, b, c), vjp)
