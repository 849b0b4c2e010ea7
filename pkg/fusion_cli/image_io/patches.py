import os
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ImageFormatError, ShapeError
from ..tensor import core
from .pnm import read_pnm
from .color import rgb_to_ycbcr, to_tensor

PNM_SUFFIXES = ('.pgm', '.ppm', '.pnm')


def pad_to_multiple(x: np.ndarray, m: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    """
    Reflect-pad the bottom and right edges up to the next multiple of m.

    :return: the padded tensor and the original (height, width).
    """
    x = core.as_tensor(x, 'image')
    if m < 1:
        raise ShapeError('Pad multiple must be positive but is {}'.format(m))
    height, width = x.shape[2:]
    extra_h = -height % m
    extra_w = -width % m
    if extra_h == 0 and extra_w == 0:
        return x.copy(), (height, width)
    if extra_h >= height or extra_w >= width:
        raise ShapeError('Image {}x{} is too small to reflect-pad to a multiple of {}'.format(height, width, m))
    padded = np.pad(x, ((0, 0), (0, 0), (0, extra_h), (0, extra_w)), mode='reflect')
    return padded, (height, width)


def crop_back(x: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    return core.crop(core.as_tensor(x, 'image'), 0, 0, size[0], size[1])


def patchify(x: np.ndarray, size: int, stride: Optional[int] = None, seed: Optional[int] = None,
             count: Optional[int] = None) -> List[np.ndarray]:
    """
    Square crops of x [n, c, h, w]: a stride grid, or count seeded random crops.
    """
    x = core.as_tensor(x, 'image')
    height, width = x.shape[2:]
    if size < 1 or size > height or size > width:
        raise ShapeError('Patch size {} does not fit a {}x{} image'.format(size, height, width))
    if count is not None:
        rng = np.random.default_rng(seed)
        corners = [(int(rng.integers(0, height - size + 1)), int(rng.integers(0, width - size + 1)))
                   for _ in range(count)]
    else:
        stride = size if stride is None else stride
        if stride < 1:
            raise ShapeError('Patch stride must be positive but is {}'.format(stride))
        corners = [(top, left) for top in range(0, height - size + 1, stride)
                   for left in range(0, width - size + 1, stride)]
    return [core.crop(x, top, left, size, size) for top, left in corners]


def load_luminance(path: str) -> np.ndarray:
    """
    A PNM file as a [1, 1, h, w] luminance tensor in [0, 1].
    """
    img = read_pnm(path)
    if img.channels == 3:
        return rgb_to_ycbcr(img)[0]
    return to_tensor(img)


def list_images(directory: str) -> List[str]:
    if not os.path.isdir(directory):
        raise ImageFormatError('Image directory {} does not exist'.format(directory))
    return sorted(name for name in os.listdir(directory) if name.lower().endswith(PNM_SUFFIXES))


def load_pair_directory(a_dir: str, b_dir: str) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    """
    Pair same-named images from two directories.

    :return: (name, a, b) luminance triples sorted by name.
    """
    names = list_images(a_dir)
    missing = [name for name in names if not os.path.isfile(os.path.join(b_dir, name))]
    if missing:
        raise ImageFormatError('No counterpart in {} for: {}'.format(b_dir, ', '.join(missing)))
    pairs = []
    for name in names:
        a = load_luminance(os.path.join(a_dir, name))
        b = load_luminance(os.path.join(b_dir, name))
        if a.shape != b.shape:
            raise ShapeError('Pair {} has mismatched sizes {} and {}'.format(name, a.shape[2:], b.shape[2:]))
        pairs.append((name, a, b))
    return pairs
