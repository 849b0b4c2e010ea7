"""
Plain-text tensor dumps for debugging: a `tensor n c h w` header line followed
by whitespace separated decimal floats in row-major order.
"""
import numpy as np

from ..atomic import atomic_write_text
from ..errors import ShapeError
from .core import Tensor, as_tensor

HEADER = 'tensor'


def dumps_tensor(x: Tensor) -> str:
    x = as_tensor(x)
    header = '{} {} {} {} {}'.format(HEADER, *x.shape)
    body = ' '.join(repr(float(v)) for v in x.ravel())
    return header + '\n' + body + '\n'


def loads_tensor(text: str) -> Tensor:
    lines = text.split('\n', 1)
    fields = lines[0].split()
    if len(fields) != 5 or fields[0] != HEADER:
        raise ShapeError('Tensor dump must start with "{} n c h w" but starts with "{}"'.format(HEADER, lines[0]))
    try:
        shape = tuple(int(v) for v in fields[1:])
    except ValueError:
        raise ShapeError('Tensor dump header has non-integer dimensions: "{}"'.format(lines[0]))
    values = np.array((lines[1] if len(lines) > 1 else '').split(), dtype=np.float64)
    expected = int(np.prod(shape))
    if values.size != expected:
        raise ShapeError('Tensor dump declares {} values but holds {}'.format(expected, values.size))
    return values.reshape(shape)


def dump_tensor(path: str, x: Tensor):
    atomic_write_text(path, dumps_tensor(x))


def load_tensor(path: str) -> Tensor:
    with open(path) as handle:
        return loads_tensor(handle.read())
