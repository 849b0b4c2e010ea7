from typing import Dict, Optional, Tuple

import numpy as np

from ..autodiff.gradcheck import gradient_check
from ..losses.losses import total_loss
from .config import FusionConfig
from .model import ModelParams, fuse

GRADCHECK_SIZE = 16
PERTURBATION = 0.05


def perturbed_params(cfg: FusionConfig, rng: np.random.Generator, scale: float = PERTURBATION) -> ModelParams:
    """
    Fresh params with every leaf nudged so zero-initialized paths carry gradient.
    """
    params = ModelParams(cfg)
    for param in params.parameters():
        param.value = param.value + rng.normal(0.0, scale, size=param.shape)
    return params


def model_gradient_check(cfg: Optional[FusionConfig] = None, h: float = 1e-5, entries: Optional[int] = None,
                         size: int = GRADCHECK_SIZE) -> Tuple[Dict[str, float], str]:
    """
    Central differences against the tape for every leaf of a small model on a random pair.

    :return: per-leaf worst relative error and the worst leaf name.
    """
    cfg = cfg or FusionConfig.micro()
    rng = np.random.default_rng(cfg.seed)
    params = perturbed_params(cfg, rng)
    a = rng.random((1, 1, size, size))
    b = rng.random((1, 1, size, size))

    def loss_fn():
        fused = fuse(a, b, params, cfg, mask_mode='soft')
        return total_loss(fused, a, b, cfg)[0]

    return gradient_check(loss_fn, params.parameters(), h=h, entries=entries)
