import numpy as np
import scipy.fft

from ..tensor import core
from .pnm import Image

DEGENERATE_GRAY = 128


def normalize_to_image(x: np.ndarray) -> Image:
    """
    Min-max stretch a 2-D plane to 8 bits; a constant plane renders mid-gray.
    """
    x = np.asarray(x, dtype=np.float64).reshape(np.shape(x)[-2:])
    low, high = float(x.min()), float(x.max())
    if high - low <= 1e-12 * max(1.0, abs(high)):
        pixels = np.full(x.shape, DEGENERATE_GRAY, dtype=np.uint8)
    else:
        pixels = np.round(255.0 * (x - low) / (high - low)).astype(np.uint8)
    return Image(x.shape[1], x.shape[0], 1, pixels)


def log_spectrum(x: np.ndarray) -> np.ndarray:
    """
    log(1 + |F(x)|) with the zero frequency moved to the center.
    """
    x = np.asarray(x, dtype=np.float64)
    plane = x.reshape((1, 1) + x.shape[-2:])
    magnitude = np.sqrt(core.fft2(plane).power())[0, 0]
    return np.log1p(scipy.fft.fftshift(magnitude))
