from typing import Dict, Sequence

import numpy as np

from .tape import Parameter


class AdamState(object):
    """
    Bias-corrected Adam moments keyed by parameter name.
    """

    def __init__(self, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = {}  # type: Dict[str, np.ndarray]
        self.v = {}  # type: Dict[str, np.ndarray]

    def __repr__(self):
        return 'AdamState(lr={}, step={}, tracked={})'.format(self.lr, self.step, len(self.m))


def adam_step(state: AdamState, params: Sequence[Parameter]):
    """
    Apply one Adam update from the populated grads. Grads are left untouched.
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for param in params:
        if not param.requires_grad:
            continue
        m = state.m.get(param.name)
        v = state.v.get(param.name)
        if m is None:
            m = np.zeros_like(param.value)
            v = np.zeros_like(param.value)
        m = state.beta1 * m + (1.0 - state.beta1) * param.grad
        v = state.beta2 * v + (1.0 - state.beta2) * param.grad ** 2
        state.m[param.name] = m
        state.v[param.name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        param.value = param.value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
