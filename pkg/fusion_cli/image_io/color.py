"""
Full-range BT.601 YCbCr on [0, 1] values with chroma centered at 0.5.
"""
from typing import Tuple

import numpy as np

from ..errors import ImageFormatError, ShapeError
from .pnm import Image

RGB_TO_YCBCR = np.array([[0.299, 0.587, 0.114],
                         [-0.168736, -0.331264, 0.5],
                         [0.5, -0.418688, -0.081312]])
YCBCR_TO_RGB = np.linalg.inv(RGB_TO_YCBCR)
CHROMA_OFFSET = 0.5


def to_tensor(img: Image, channel: int = 0) -> np.ndarray:
    """
    One channel of an 8-bit image as a [1, 1, h, w] tensor in [0, 1].
    """
    return (img.pixels[:, :, channel].astype(np.float64) / 255.0).reshape(1, 1, img.height, img.width)


def from_tensor(x: np.ndarray) -> Image:
    """
    A [1, 1, h, w] or [h, w] tensor in [0, 1] as an 8-bit grayscale image.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 4:
        if x.shape[:2] != (1, 1):
            raise ShapeError('Expected a single [1, 1, h, w] image but got {}'.format(x.shape))
        x = x[0, 0]
    pixels = np.round(255.0 * np.clip(x, 0.0, 1.0)).astype(np.uint8)
    return Image(x.shape[1], x.shape[0], 1, pixels)


def rgb_to_ycbcr(img: Image) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    :return: y, cb and cr planes as [1, 1, h, w] tensors in [0, 1].
    """
    if img.channels != 3:
        raise ImageFormatError('YCbCr conversion needs a color image but got {} channel(s)'.format(img.channels))
    rgb = img.pixels.astype(np.float64) / 255.0
    ycc = np.einsum('ij,hwj->ihw', RGB_TO_YCBCR, rgb, optimize=True)
    ycc[1:] += CHROMA_OFFSET
    shape = (1, 1, img.height, img.width)
    return ycc[0].reshape(shape), ycc[1].reshape(shape), ycc[2].reshape(shape)


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> Image:
    planes = [np.asarray(v, dtype=np.float64) for v in (y, cb, cr)]
    if len({p.shape for p in planes}) != 1:
        raise ShapeError('Y, Cb and Cr planes disagree in shape: {}'.format([p.shape for p in planes]))
    height, width = planes[0].shape[-2:]
    ycc = np.stack([p.reshape(height, width) for p in planes])
    ycc[1:] -= CHROMA_OFFSET
    rgb = np.einsum('ij,jhw->hwi', YCBCR_TO_RGB, ycc, optimize=True)
    pixels = np.round(255.0 * np.clip(rgb, 0.0, 1.0)).astype(np.uint8)
    return Image(width, height, 3, pixels)
