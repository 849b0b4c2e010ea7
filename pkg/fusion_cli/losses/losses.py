"""
Training objective: structural (SSIM), texture (Sobel gradient) and intensity
terms combined as mu1 * l_ssim + mu2 * l_text + mu3 * l_int.
"""
import numpy as np
from scipy.signal.windows import gaussian

from ..autodiff import ops
from ..autodiff.tape import Node
from ..errors import ConfigError, ShapeError
from ..tensor import core

WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1 = 0.01
K2 = 0.03
DATA_RANGE = 1.0
AGGREGATIONS = ('max', 'mean')


class LossReport(object):
    def __init__(self, l_ssim: float, l_text: float, l_int: float, mu1: float, mu2: float, mu3: float):
        self.l_ssim = l_ssim
        self.l_text = l_text
        self.l_int = l_int
        self.mu1 = mu1
        self.mu2 = mu2
        self.mu3 = mu3
        self.l_total = mu1 * l_ssim + mu2 * l_text + mu3 * l_int

    def row(self, step: int) -> list:
        return [step, self.l_ssim, self.l_text, self.l_int, self.l_total]

    def __repr__(self):
        return 'LossReport(l_ssim={:.6f}, l_text={:.6f}, l_int={:.6f}, l_total={:.6f})'.format(
            self.l_ssim, self.l_text, self.l_int, self.l_total)


def gaussian_window(size: int, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    profile = gaussian(size, sigma)
    kernel = np.outer(profile, profile)
    return kernel / kernel.sum()


def window_size_for(height: int, width: int) -> int:
    """
    11, or the largest odd size that fits a smaller image.
    """
    size = min(WINDOW_SIZE, height, width)
    if size < 1:
        raise ShapeError('SSIM needs a non-empty image but got {}x{}'.format(height, width))
    return size if size % 2 else size - 1


def _check_pair(x: Node, y: Node, what: str):
    if x.shape != y.shape:
        raise ShapeError('{} needs images of equal shape but got {} and {}'.format(what, x.shape, y.shape))
    if len(x.shape) != 4 or x.shape[1] != 1:
        raise ShapeError('{} expects single channel [n, 1, h, w] images but got {}'.format(what, x.shape))


def ssim_index(x, y) -> Node:
    """
    Mean local SSIM over the valid region of the Gaussian window, averaged over the batch.
    """
    x, y = ops.lift(x), ops.lift(y)
    _check_pair(x, y, 'SSIM')
    size = window_size_for(*x.shape[2:])
    window = gaussian_window(size).reshape(1, 1, size, size)
    c1 = (K1 * DATA_RANGE) ** 2
    c2 = (K2 * DATA_RANGE) ** 2

    def blur(v):
        return ops.conv2d(v, window)

    mu_x = blur(x)
    mu_y = blur(y)
    mu_xx = ops.mul(mu_x, mu_x)
    mu_yy = ops.mul(mu_y, mu_y)
    mu_xy = ops.mul(mu_x, mu_y)
    var_x = ops.sub(blur(ops.mul(x, x)), mu_xx)
    var_y = ops.sub(blur(ops.mul(y, y)), mu_yy)
    cov = ops.sub(blur(ops.mul(x, y)), mu_xy)

    numerator = ops.mul(ops.add(ops.scale(mu_xy, 2.0), c1), ops.add(ops.scale(cov, 2.0), c2))
    denominator = ops.mul(ops.add(ops.add(mu_xx, mu_yy), c1), ops.add(ops.add(var_x, var_y), c2))
    return ops.mean_all(ops.div(numerator, denominator))


def loss_ssim(f, i1, i2) -> Node:
    return ops.add(ops.sub(1.0, ssim_index(f, i1)), ops.sub(1.0, ssim_index(f, i2)))


def loss_text(f, i1, i2) -> Node:
    f = ops.lift(f)
    target = np.maximum(core.sobel_grad(ops.lift(i1).value), core.sobel_grad(ops.lift(i2).value))
    return ops.mean_all(ops.absolute(ops.sub(ops.sobel_grad(f), target)))


def aggregate(i1: np.ndarray, i2: np.ndarray, mode: str = 'max') -> np.ndarray:
    if mode == 'max':
        return np.maximum(i1, i2)
    if mode == 'mean':
        return 0.5 * (i1 + i2)
    raise ConfigError('Unknown intensity aggregation {} (expected one of {})'.format(mode, AGGREGATIONS))


def loss_int(f, i1, i2, mode: str = 'max') -> Node:
    f = ops.lift(f)
    target = aggregate(ops.lift(i1).value, ops.lift(i2).value, mode)
    return ops.mean_all(ops.absolute(ops.sub(f, target)))


def total_loss(f, i1, i2, cfg):
    """
    Weighted objective and its per-term report.

    cfg supplies mu1, mu2, mu3 and intensity_mode.

    :return: the differentiable total and a LossReport.
    """
    f = ops.lift(f)
    _check_pair(f, ops.lift(i1), 'Loss')
    _check_pair(f, ops.lift(i2), 'Loss')
    l_ssim = loss_ssim(f, i1, i2)
    l_text = loss_text(f, i1, i2)
    l_int = loss_int(f, i1, i2, cfg.intensity_mode)
    total = ops.add(ops.add(ops.scale(l_ssim, cfg.mu1), ops.scale(l_text, cfg.mu2)), ops.scale(l_int, cfg.mu3))
    report = LossReport(l_ssim.item(), l_text.item(), l_int.item(), cfg.mu1, cfg.mu2, cfg.mu3)
    return total, report
