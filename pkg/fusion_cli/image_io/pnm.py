"""
Binary PGM (P5) and PPM (P6) codec, 8-bit only.
"""
import numpy as np

from ..atomic import atomic_write
from ..errors import ImageFormatError

MAGIC_CHANNELS = {b'P5': 1, b'P6': 3}
MAXVAL = 255


class Image(object):
    """
    8-bit pixels stored as a [height, width, channels] uint8 array.
    """

    def __init__(self, width: int, height: int, channels: int, pixels: np.ndarray):
        if channels not in (1, 3):
            raise ImageFormatError('Images have 1 or 3 channels, not {}'.format(channels))
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.size != width * height * channels:
            raise ImageFormatError('Expected {} x {} x {} pixels but got {}'
                                   .format(width, height, channels, pixels.size))
        self.width = width
        self.height = height
        self.channels = channels
        self.pixels = pixels.reshape(height, width, channels)

    def __eq__(self, other):
        return (isinstance(other, Image) and self.channels == other.channels
                and np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return 'Image(width={}, height={}, channels={})'.format(self.width, self.height, self.channels)


def _header_tokens(data: bytes, count: int):
    """
    Pull count whitespace separated header tokens, skipping '#' comments.

    :return: the tokens and the offset of the first payload byte.
    """
    tokens = []
    position = 0
    while len(tokens) < count:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if position >= len(data):
            raise ImageFormatError('Truncated PNM header after {} fields'.format(len(tokens)))
        if data[position:position + 1] == b'#':
            end = data.find(b'\n', position)
            position = len(data) if end < 0 else end + 1
            continue
        start = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        tokens.append(data[start:position])
    if position >= len(data):
        raise ImageFormatError('PNM header is not followed by a payload')
    return tokens, position + 1


def decode_pnm(data: bytes) -> Image:
    tokens, offset = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in MAGIC_CHANNELS:
        raise ImageFormatError('Unsupported PNM magic {!r} (expected P5 or P6)'.format(magic))
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError('PNM header fields are not integers: {}'.format(tokens[1:]))
    if width < 1 or height < 1:
        raise ImageFormatError('PNM size {}x{} is empty'.format(width, height))
    if maxval != MAXVAL:
        raise ImageFormatError('Only maxval {} is supported but the file declares {}'.format(MAXVAL, maxval))
    channels = MAGIC_CHANNELS[magic]
    expected = width * height * channels
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise ImageFormatError('Truncated PNM payload: expected {} bytes but found {}'.format(expected, len(payload)))
    return Image(width, height, channels, np.frombuffer(payload, dtype=np.uint8).copy())


def encode_pnm(img: Image) -> bytes:
    magic = b'P5' if img.channels == 1 else b'P6'
    header = magic + '\n{} {}\n{}\n'.format(img.width, img.height, MAXVAL).encode('ascii')
    return header + np.ascontiguousarray(img.pixels).tobytes()


def read_pnm(path: str) -> Image:
    try:
        with open(path, 'rb') as stream:
            data = stream.read()
    except OSError as error:
        raise ImageFormatError('Cannot read image {}: {}'.format(path, error))
    return decode_pnm(data)


def write_pnm(path: str, img: Image):
    atomic_write(path, encode_pnm(img))
