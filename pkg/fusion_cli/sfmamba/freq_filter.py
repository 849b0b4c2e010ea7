"""
Learnable-threshold frequency filter.

The power spectrum of every (sample, channel) plane is normalized by its own
peak so a threshold in (0, 1] is meaningful across channels. Bins whose
normalized power reaches the threshold pass; the rest are removed before the
inverse transform. The hard mask is used at inference with the exact maximum
as the peak. Training uses the sigmoid surrogate sigmoid(k_sharp * (P - lambda))
and a smooth peak, the order-16 norm of the plane's power, so the whole branch
is differentiable.
"""
from typing import Optional

import numpy as np

from ..autodiff import ops
from ..autodiff.tape import Node, record
from ..errors import ConfigError, NumericalError
from ..tensor import core

MASK_MODES = ('hard', 'soft')
DEFAULT_SHARPNESS = 50.0
SMOOTH_PEAK_ORDER = 16


def conjugate_mirror(a: np.ndarray) -> np.ndarray:
    """
    a[..., (-u) mod h, (-v) mod w] for every bin (u, v).
    """
    return np.roll(np.flip(a, axis=(-2, -1)), 1, axis=(-2, -1))


def normalized_power(spectrum: np.ndarray, order: Optional[int] = None):
    """
    Conjugate-symmetrized power over its per-plane peak.

    The peak is the maximum, or the order-norm of the power when order is given.

    :return: normalized power P, the per-plane peaks and the raw power.
    """
    power = np.abs(spectrum) ** 2
    power = 0.5 * (power + conjugate_mirror(power))
    peak = power.max(axis=(-2, -1), keepdims=True)
    if order is not None:
        scaled = power / np.where(peak > 0, peak, 1.0)
        peak = peak * np.sum(scaled ** order, axis=(-2, -1), keepdims=True) ** (1.0 / order)
    safe = np.where(peak > 0, peak, 1.0)
    return np.where(peak > 0, power / safe, 0.0), peak, power


def frequency_mask(p: np.ndarray, lam: float, mode: str = 'hard', k_sharp: float = DEFAULT_SHARPNESS) -> np.ndarray:
    if mode == 'hard':
        return (p >= lam).astype(np.float64)
    if mode == 'soft':
        return core.sigmoid(k_sharp * (p - lam))
    raise ConfigError('Unknown mask mode {} (expected one of {})'.format(mode, MASK_MODES))


def _inverse_real(z: np.ndarray) -> np.ndarray:
    out = core.ifft2_complex(core.Spectrum.from_complex(z))
    limit = 1e-8 * np.max(np.abs(out.real), initial=0.0) + 1e-12
    residue = np.max(np.abs(out.imag), initial=0.0)
    if residue >= limit:
        raise NumericalError('Filtered spectrum is not conjugate symmetric: imaginary residue {:.3e}'
                             .format(residue))
    return np.ascontiguousarray(out.real)


def freq_branch(lp, lam, mode: str = 'hard', k_sharp: float = DEFAULT_SHARPNESS) -> Node:
    """
    L_T = Re(ifft2(fft2(lp) * mask)) with mask taken from the normalized power.

    lam is the threshold itself (a Node or float), not its raw logit.
    """
    lp, lam = ops.lift(lp), ops.lift(lam)
    threshold = lam.item()
    if not 0.0 < threshold <= 1.0:
        raise ConfigError('Frequency threshold must lie in (0, 1] but is {}'.format(threshold))
    if mode not in MASK_MODES:
        raise ConfigError('Unknown mask mode {} (expected one of {})'.format(mode, MASK_MODES))

    spectrum = core.fft2(lp.value).to_complex()
    order = SMOOTH_PEAK_ORDER if mode == 'soft' else None
    p, peak, _ = normalized_power(spectrum, order)
    mask = frequency_mask(p, threshold, mode, k_sharp)
    out = _inverse_real(spectrum * mask)

    def vjp(g):
        g_spec = core.fft2(g).to_complex()
        dx = np.ascontiguousarray(core.ifft2_complex(core.Spectrum.from_complex(mask * g_spec)).real)
        if mode == 'hard':
            return dx, None
        q = np.real(spectrum * np.conj(g_spec)) * k_sharp * mask * (1.0 - mask)
        dlam = -np.sum(q)
        safe = np.where(peak > 0, peak, 1.0)
        through_peak = np.sum(q * p, axis=(-2, -1), keepdims=True) * p ** (order - 1)
        a = np.where(peak > 0, (q - through_peak) / safe, 0.0)
        dx = dx + 2.0 * np.ascontiguousarray(core.ifft2_complex(core.Spectrum.from_complex(a * spectrum)).real)
        return dx, np.full(lam.shape, dlam)

    return record(out, (lp, lam), vjp)
