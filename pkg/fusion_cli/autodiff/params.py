from collections import OrderedDict
from typing import List

import numpy as np

from .tape import Parameter


class ParamSet(object):
    """
    A named tree of Parameters. Leaf names are dotted paths under the set's prefix.
    """

    def __init__(self, prefix: str):
        self.prefix = prefix
        self._leaves = OrderedDict()
        self._children = OrderedDict()

    def leaf(self, name: str, value) -> Parameter:
        path = '{}.{}'.format(self.prefix, name) if self.prefix else name
        param = Parameter(path, np.array(value, dtype=np.float64))
        self._leaves[name] = param
        return param

    def child(self, name: str, params: 'ParamSet') -> 'ParamSet':
        self._children[name] = params
        return params

    def parameters(self) -> List[Parameter]:
        found = list(self._leaves.values())
        for child in self._children.values():
            found.extend(child.parameters())
        return found

    def trainable(self) -> List[Parameter]:
        return [p for p in self.parameters() if p.requires_grad]

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def __repr__(self):
        return '{}(prefix={}, leaves={})'.format(type(self).__name__, self.prefix, len(self.parameters()))


def fan_in_normal(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    """
    Normal weights with standard deviation 1/sqrt(fan_in).
    """
    return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
