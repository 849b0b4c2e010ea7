"""
No-reference and source-referenced fusion quality metrics.

Every metric works on 8-bit quantized luminance q = round(255 * clip(x, 0, 1)).
Inputs may be [h, w] planes or single-image [1, 1, h, w] tensors.
"""
from typing import Dict, List

import numpy as np
from scipy import ndimage
from skimage.measure import shannon_entropy

from ..errors import ShapeError
from ..losses.losses import ssim_index
from ..tensor import core

QABF_GAMMA_G = 0.9994
QABF_KAPPA_G = -15.0
QABF_SIGMA_G = 0.5
QABF_GAMMA_A = 0.9879
QABF_KAPPA_A = -22.0
QABF_SIGMA_A = 0.8

METRIC_NAMES = ('en', 'sd', 'sf', 'mi', 'scd', 'qabf', 'ssim')


class MetricReport(object):
    def __init__(self, en: float, sd: float, sf: float, mi: float, scd: float, qabf: float, ssim: float):
        self.en = en
        self.sd = sd
        self.sf = sf
        self.mi = mi
        self.scd = scd
        self.qabf = qabf
        self.ssim = ssim

    def values(self) -> List[float]:
        return [getattr(self, name) for name in METRIC_NAMES]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(METRIC_NAMES, self.values()))

    def __repr__(self):
        return 'MetricReport({})'.format(', '.join('{}={:.4f}'.format(k, v) for k, v in self.as_dict().items()))


def plane(x) -> np.ndarray:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim == 4:
        if array.shape[0] != 1 or array.shape[1] != 1:
            raise ShapeError('Metrics take one single channel image but got shape {}'.format(array.shape))
        array = array[0, 0]
    if array.ndim != 2:
        raise ShapeError('Metrics take [h, w] or [1, 1, h, w] images but got shape {}'.format(array.shape))
    return array


def quantize(x) -> np.ndarray:
    return np.round(255.0 * np.clip(plane(x), 0.0, 1.0))


def _same_shape(*planes: np.ndarray):
    if len({p.shape for p in planes}) != 1:
        raise ShapeError('Metric inputs disagree in shape: {}'.format([p.shape for p in planes]))


def entropy(x) -> float:
    return float(shannon_entropy(quantize(x), base=2))


def std_dev(x) -> float:
    return float(np.std(quantize(x)))


def spatial_frequency(x) -> float:
    """
    sqrt(RF^2 + CF^2) over the interior first differences along rows (RF) and columns (CF).
    """
    q = quantize(x)
    rf = np.sqrt(np.mean(np.diff(q, axis=1) ** 2)) if q.shape[1] > 1 else 0.0
    cf = np.sqrt(np.mean(np.diff(q, axis=0) ** 2)) if q.shape[0] > 1 else 0.0
    return float(np.sqrt(rf ** 2 + cf ** 2))


def mutual_information_component(x: np.ndarray, y: np.ndarray) -> float:
    """
    MI in bits between two 8-bit planes from their joint 256 x 256 histogram.
    """
    joint, _, _ = np.histogram2d(x.ravel(), y.ravel(), bins=256, range=[[0, 256], [0, 256]])
    p = joint / joint.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nonzero = p > 0
    return float(np.sum(p[nonzero] * np.log2(p[nonzero] / (px @ py)[nonzero])))


def mutual_information(f, a, b) -> float:
    qf, qa, qb = quantize(f), quantize(a), quantize(b)
    _same_shape(qf, qa, qb)
    return mutual_information_component(qf, qa) + mutual_information_component(qf, qb)


def pearson(u: np.ndarray, v: np.ndarray) -> float:
    """
    Pearson correlation; 0 when either operand has zero variance.
    """
    du = u - u.mean()
    dv = v - v.mean()
    denominator = np.sqrt(np.sum(du ** 2) * np.sum(dv ** 2))
    if denominator == 0:
        return 0.0
    return float(np.sum(du * dv) / denominator)


def scd(f, a, b) -> float:
    qf, qa, qb = quantize(f), quantize(a), quantize(b)
    _same_shape(qf, qa, qb)
    return pearson(qf - qb, qa) + pearson(qf - qa, qb)


def _edges(q: np.ndarray):
    sx = ndimage.correlate(q, core.SOBEL_X, mode='nearest')
    sy = ndimage.correlate(q, core.SOBEL_Y, mode='nearest')
    strength = np.sqrt(sx ** 2 + sy ** 2)
    safe = np.where(sx == 0, 1.0, sx)
    orientation = np.where(sx == 0, np.pi / 2, np.arctan(sy / safe))
    return strength, orientation


def _preservation(g_src: np.ndarray, a_src: np.ndarray, g_f: np.ndarray, a_f: np.ndarray) -> np.ndarray:
    larger = np.maximum(g_src, g_f)
    smaller = np.minimum(g_src, g_f)
    relative = np.where(larger > 0, smaller / np.where(larger > 0, larger, 1.0), 1.0)
    alignment = 1.0 - np.abs(a_src - a_f) / (np.pi / 2)
    q_g = QABF_GAMMA_G / (1.0 + np.exp(QABF_KAPPA_G * (relative - QABF_SIGMA_G)))
    q_a = QABF_GAMMA_A / (1.0 + np.exp(QABF_KAPPA_A * (alignment - QABF_SIGMA_A)))
    return q_g * q_a


def qabf(f, a, b) -> float:
    """
    Edge-preservation measure: Sobel strength and orientation of each source
    against the fused image, weighted by source edge strength.
    """
    qf, qa, qb = quantize(f), quantize(a), quantize(b)
    _same_shape(qf, qa, qb)
    g_f, a_f = _edges(qf)
    g_a, a_a = _edges(qa)
    g_b, a_b = _edges(qb)
    weight = np.sum(g_a + g_b)
    if weight == 0:
        return 0.0
    preserved = _preservation(g_a, a_a, g_f, a_f) * g_a + _preservation(g_b, a_b, g_f, a_f) * g_b
    return float(np.sum(preserved) / weight)


def ssim_metric(f, a, b) -> float:
    qf, qa, qb = (quantize(v) / 255.0 for v in (f, a, b))
    _same_shape(qf, qa, qb)

    def index(x, y):
        return ssim_index(x.reshape((1, 1) + x.shape), y.reshape((1, 1) + y.shape)).item()

    return index(qf, qa) + index(qf, qb)


def evaluate(f, a, b) -> MetricReport:
    return MetricReport(entropy(f), std_dev(f), spatial_frequency(f), mutual_information(f, a, b),
                        scd(f, a, b), qabf(f, a, b), ssim_metric(f, a, b))


def mean_report(reports: List[MetricReport]) -> MetricReport:
    if not reports:
        raise ShapeError('Cannot average an empty list of metric reports')
    return MetricReport(*np.mean([r.values() for r in reports], axis=0).tolist())
