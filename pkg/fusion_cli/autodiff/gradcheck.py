"""
Central finite-difference checks against the tape's analytic gradients.
"""
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .tape import Node, Parameter, Tape, zero_grad

ERROR_FLOOR = 1e-8


def relative_error(analytic: float, numeric: float, scale: float = 0.0) -> float:
    """
    |analytic - numeric| over the larger of both magnitudes, scale and a 1e-8 floor.
    """
    return abs(analytic - numeric) / max(ERROR_FLOOR, abs(numeric), abs(analytic), scale)


def finite_diff_check(f: Callable[[np.ndarray], float], p: Parameter, h: float = 1e-5,
                      indices: Optional[Sequence[int]] = None) -> float:
    """
    Compare p.grad against central differences of f.

    f maps a candidate value for p to the scalar loss; p.grad must already hold
    the analytic gradient at p.value. Each entry uses the step h * max(1, |p_i|).
    Errors are scaled by the largest analytic gradient magnitude of p.

    :return: the worst relative error over the checked entries.
    """
    base = np.array(p.value, dtype=np.float64)
    flat_grad = p.grad.reshape(-1)
    if indices is None:
        indices = range(base.size)
    scale = float(np.max(np.abs(flat_grad), initial=0.0))
    worst = 0.0
    for index in indices:
        step = h * max(1.0, abs(base.reshape(-1)[index]))
        shifted = base.copy()
        shifted.reshape(-1)[index] += step
        upper = f(shifted)
        shifted.reshape(-1)[index] -= 2.0 * step
        lower = f(shifted)
        numeric = (upper - lower) / (2.0 * step)
        worst = max(worst, relative_error(float(flat_grad[index]), numeric, scale))
    return worst


def largest_entries(p: Parameter, count: Optional[int]) -> Sequence[int]:
    """
    Indices of the count entries with the largest analytic gradient magnitude.
    """
    if count is None or count >= p.size:
        return range(p.size)
    order = np.argsort(-np.abs(p.grad.reshape(-1)), kind='stable')
    return [int(i) for i in order[:count]]


def gradient_check(loss_fn: Callable[[], Node], params: Sequence[Parameter], h: float = 1e-5,
                   entries: Optional[int] = None) -> Tuple[Dict[str, float], str]:
    """
    Run finite_diff_check over every parameter of a loss closure.

    loss_fn must rebuild the loss from the current parameter values.

    :return: per-parameter worst relative error and the name of the worst parameter.
    """
    zero_grad(params)
    tape = Tape()
    with tape.recording():
        loss = loss_fn()
    tape.backward(loss)

    errors = {}
    for param in params:
        if not param.requires_grad:
            continue

        def loss_at(value, param=param):
            saved = param.value
            param.value = value
            try:
                return loss_fn().item()
            finally:
                param.value = saved

        errors[param.name] = finite_diff_check(loss_at, param, h=h, indices=largest_entries(param, entries))
    worst = max(errors, key=errors.get) if errors else ''
    return errors, worst
