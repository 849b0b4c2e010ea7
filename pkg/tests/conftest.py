"""
Shared fixtures: seeded generators, the micro model configuration and a
naive convolution used as an oracle for the vectorized kernels.
"""
import numpy as np
import pytest

from fusion_cli.pipeline.checkpoint import save_checkpoint
from fusion_cli.pipeline.config import FusionConfig
from fusion_cli.pipeline.model import ModelParams


def naive_conv2d(x, w, bias=None, stride=1, dilation=1, groups=1, pad=0):
    n, c_in, h, wd = x.shape
    c_out, c_group, k, _ = w.shape
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    oh = (h + 2 * pad - dilation * (k - 1) - 1) // stride + 1
    ow = (wd + 2 * pad - dilation * (k - 1) - 1) // stride + 1
    out = np.zeros((n, c_out, oh, ow))
    per_group = c_out // groups
    for b in range(n):
        for o in range(c_out):
            g = o // per_group
            for r in range(oh):
                for s in range(ow):
                    total = 0.0
                    for c in range(c_group):
                        for i in range(k):
                            for j in range(k):
                                total += (w[o, c, i, j]
                                          * padded[b, g * c_group + c, r * stride + i * dilation,
                                                   s * stride + j * dilation])
                    out[b, o, r, s] = total + (0.0 if bias is None else bias[o])
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def conv_oracle():
    return naive_conv2d


@pytest.fixture
def micro_config():
    return FusionConfig.micro()


@pytest.fixture
def micro_checkpoint(tmp_path, micro_config):
    path = str(tmp_path / 'micro.ckpt')
    save_checkpoint(path, ModelParams(micro_config), micro_config)
    return path
