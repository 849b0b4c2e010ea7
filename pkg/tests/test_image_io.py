"""
PNM codec, YCbCr conversion, padding, patch extraction and rendering helpers.
"""
import os

import numpy as np
import pytest

from fusion_cli.errors import ImageFormatError, ShapeError
from fusion_cli.image_io.color import from_tensor, rgb_to_ycbcr, to_tensor, ycbcr_to_rgb
from fusion_cli.image_io.patches import crop_back, list_images, load_pair_directory, pad_to_multiple, patchify
from fusion_cli.image_io.pnm import Image, decode_pnm, encode_pnm, read_pnm, write_pnm
from fusion_cli.image_io.render import DEGENERATE_GRAY, log_spectrum, normalize_to_image


def test_pgm_round_trip_is_byte_identical():
    data = b'P5\n2 2\n255\n' + bytes([0, 64, 128, 255])
    img = decode_pnm(data)
    assert (img.width, img.height, img.channels) == (2, 2, 1)
    assert img.pixels[:, :, 0].tolist() == [[0, 64], [128, 255]]
    assert encode_pnm(img) == data


def test_ppm_with_comment():
    data = b'P6\n# written by hand\n2 1\n255\n' + bytes([255, 0, 0, 0, 0, 255])
    img = decode_pnm(data)
    assert img.channels == 3
    assert img.pixels[0, 0].tolist() == [255, 0, 0]
    assert img.pixels[0, 1].tolist() == [0, 0, 255]


@pytest.mark.parametrize('data', [
    b'P5\n2 2\n255\n' + bytes([1, 2, 3]),
    b'P2\n2 2\n255\n' + bytes([1, 2, 3, 4]),
    b'P5\n2 2\n65535\n' + bytes(8),
    b'P5\n2 x\n255\n' + bytes(4),
    b'P5\n2',
])
def test_bad_pnm_raises(data):
    with pytest.raises(ImageFormatError):
        decode_pnm(data)


def test_write_and_read_file(tmp_path, rng):
    img = Image(5, 3, 3, rng.integers(0, 256, size=(3, 5, 3)))
    path = str(tmp_path / 'x.ppm')
    write_pnm(path, img)
    assert read_pnm(path) == img
    assert os.listdir(str(tmp_path)) == ['x.ppm']


@pytest.mark.parametrize('umask,mode', [(0o022, 0o644), (0o077, 0o600), (0o002, 0o664)])
def test_written_files_follow_umask(tmp_path, rng, umask, mode):
    path = str(tmp_path / 'x.pgm')
    previous = os.umask(umask)
    try:
        write_pnm(path, Image(2, 2, 1, rng.integers(0, 256, size=(2, 2, 1))))
    finally:
        os.umask(previous)
    assert os.stat(path).st_mode & 0o777 == mode


def test_missing_image_file_raises(tmp_path):
    with pytest.raises(ImageFormatError):
        read_pnm(str(tmp_path / 'absent.pgm'))


def test_tensor_conversions(rng):
    img = Image(4, 3, 1, rng.integers(0, 256, size=(3, 4, 1)))
    x = to_tensor(img)
    assert x.shape == (1, 1, 3, 4)
    assert x.min() >= 0.0 and x.max() <= 1.0
    assert from_tensor(x) == img


def test_gray_pixels_have_neutral_chroma():
    img = Image(2, 2, 3, np.full((2, 2, 3), 90, dtype=np.uint8))
    y, cb, cr = rgb_to_ycbcr(img)
    assert np.allclose(y, 90 / 255.0)
    assert np.allclose(cb, 0.5, atol=1e-6)
    assert np.allclose(cr, 0.5, atol=1e-6)


def test_red_luminance():
    img = Image(1, 1, 3, np.array([255, 0, 0], dtype=np.uint8))
    y, _, cr = rgb_to_ycbcr(img)
    assert abs(y.item() - 0.299) < 1 / 255.0
    assert cr.item() > 0.5


def test_color_round_trip_within_one_level(rng):
    img = Image(8, 6, 3, rng.integers(0, 256, size=(6, 8, 3)))
    back = ycbcr_to_rgb(*rgb_to_ycbcr(img))
    assert np.max(np.abs(back.pixels.astype(int) - img.pixels.astype(int))) <= 1


def test_ycbcr_needs_color():
    with pytest.raises(ImageFormatError):
        rgb_to_ycbcr(Image(1, 1, 1, np.zeros(1, dtype=np.uint8)))


def test_pad_to_multiple(rng):
    x = rng.uniform(size=(1, 1, 130, 129))
    padded, size = pad_to_multiple(x, 4)
    assert padded.shape == (1, 1, 132, 132)
    assert size == (130, 129)
    assert np.array_equal(padded[..., 130, :129], x[..., 128, :])
    assert np.array_equal(padded[..., 131, :129], x[..., 127, :])
    assert np.array_equal(crop_back(padded, size), x)


def test_pad_to_multiple_leaves_aligned_input(rng):
    x = rng.uniform(size=(1, 1, 8, 12))
    padded, size = pad_to_multiple(x, 4)
    assert np.array_equal(padded, x)
    assert size == (8, 12)


def test_patchify_grid(rng):
    x = rng.uniform(size=(1, 1, 128, 128))
    patches = patchify(x, 64, stride=64)
    assert len(patches) == 4
    assert np.array_equal(patches[3], x[..., 64:, 64:])


def test_patchify_random_is_seeded(rng):
    x = rng.uniform(size=(1, 1, 20, 20))
    first = patchify(x, 8, seed=3, count=5)
    second = patchify(x, 8, seed=3, count=5)
    assert len(first) == 5
    assert all(np.array_equal(p, q) for p, q in zip(first, second))
    with pytest.raises(ShapeError):
        patchify(x, 24)


def test_patchify_rejects_non_positive_stride(rng):
    x = rng.uniform(size=(1, 1, 16, 16))
    for stride in (0, -4):
        with pytest.raises(ShapeError):
            patchify(x, 8, stride=stride)


def _write_gray(path, pixels):
    write_pnm(str(path), Image(pixels.shape[1], pixels.shape[0], 1, pixels))


def test_load_pair_directory(tmp_path, rng):
    for side in ('a', 'b'):
        (tmp_path / side).mkdir()
        for name in ('one.pgm', 'two.pgm'):
            _write_gray(tmp_path / side / name, rng.integers(0, 256, size=(4, 6)).astype(np.uint8))
    (tmp_path / 'a' / 'notes.txt').write_text('ignored')
    pairs = load_pair_directory(str(tmp_path / 'a'), str(tmp_path / 'b'))
    assert [name for name, _, _ in pairs] == ['one.pgm', 'two.pgm']
    assert pairs[0][1].shape == (1, 1, 4, 6)
    assert list_images(str(tmp_path / 'a')) == ['one.pgm', 'two.pgm']


def test_load_pair_directory_errors(tmp_path, rng):
    (tmp_path / 'a').mkdir()
    (tmp_path / 'b').mkdir()
    _write_gray(tmp_path / 'a' / 'x.pgm', np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ImageFormatError):
        load_pair_directory(str(tmp_path / 'a'), str(tmp_path / 'b'))
    _write_gray(tmp_path / 'b' / 'x.pgm', np.zeros((4, 6), dtype=np.uint8))
    with pytest.raises(ShapeError):
        load_pair_directory(str(tmp_path / 'a'), str(tmp_path / 'b'))
    with pytest.raises(ImageFormatError):
        list_images(str(tmp_path / 'missing'))


def test_normalize_to_image():
    img = normalize_to_image(np.array([[0.0, 1.0], [2.0, 4.0]]))
    assert img.pixels[:, :, 0].tolist() == [[0, 64], [128, 255]]
    flat = normalize_to_image(np.full((3, 3), 5.0))
    assert np.all(flat.pixels == DEGENERATE_GRAY)


def test_log_spectrum_centers_frequencies():
    j = np.arange(16)
    x = np.tile(np.sin(2 * np.pi * 4 * j / 16), (16, 1))
    s = log_spectrum(x)
    assert s.shape == (16, 16)
    peaks = sorted(np.unravel_index(i, s.shape) for i in np.argsort(s.ravel())[-2:])
    assert peaks == [(8, 4), (8, 12)]
