from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff.optim import AdamState, adam_step
from ..autodiff.tape import Tape
from ..errors import ConfigError
from ..image_io.patches import patchify
from ..losses.losses import LossReport, total_loss
from .config import RunConfig
from .model import ModelParams, fuse

SMOOTHING = 0.9
CSV_HEADER = ['step', 'l_ssim', 'l_text', 'l_int', 'l_total']


class LossTrace(object):
    """
    Raw per-step reports plus their exponential moving average of l_total.
    """

    def __init__(self, smoothing: float = SMOOTHING):
        self.smoothing = smoothing
        self.steps = []  # type: List[int]
        self.reports = []  # type: List[LossReport]
        self.smoothed = []  # type: List[float]

    def append(self, step: int, report: LossReport):
        if self.smoothed:
            value = self.smoothing * self.smoothed[-1] + (1.0 - self.smoothing) * report.l_total
        else:
            value = report.l_total
        self.steps.append(step)
        self.reports.append(report)
        self.smoothed.append(value)

    def rows(self) -> List[list]:
        return [report.row(step) for step, report in zip(self.steps, self.reports)]

    def __len__(self):
        return len(self.reports)

    def __repr__(self):
        last = self.smoothed[-1] if self.smoothed else float('nan')
        return 'LossTrace(steps={}, smoothed={:.6f})'.format(len(self), last)


def sample_batch(pairs: Sequence[Tuple[np.ndarray, np.ndarray]], batch_size: int, patch_size: int,
                 rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random aligned crops of random pairs, each flipped horizontally with probability 1/2.
    """
    first, second = [], []
    for _ in range(batch_size):
        a, b = pairs[int(rng.integers(len(pairs)))]
        crop = patchify(np.concatenate([a, b], axis=1), patch_size, seed=int(rng.integers(2 ** 32)), count=1)[0]
        if rng.random() < 0.5:
            crop = crop[..., ::-1]
        first.append(crop[:, :1])
        second.append(crop[:, 1:])
    return np.ascontiguousarray(np.concatenate(first)), np.ascontiguousarray(np.concatenate(second))


def train_step(params: ModelParams, state: AdamState, a: np.ndarray, b: np.ndarray, cfg: RunConfig) -> LossReport:
    tape = Tape()
    with tape.recording():
        fused = fuse(a, b, params, cfg.fusion, mask_mode='soft')
        total, report = total_loss(fused, a, b, cfg.fusion)
    tape.backward(total)
    adam_step(state, params.trainable())
    params.zero_grad()
    return report


def train_toy(pairs: Sequence[Tuple[np.ndarray, np.ndarray]], cfg: RunConfig, steps: Optional[int] = None,
              params: Optional[ModelParams] = None, state: Optional[AdamState] = None,
              on_step: Optional[Callable[[int, LossReport], None]] = None):
    """
    Adam on the weighted fusion loss over seeded random patches.

    Passing the params and AdamState of a checkpoint resumes training; step
    numbers continue from the state.

    :return: the trained params, the LossTrace and the AdamState.
    """
    if not pairs:
        raise ConfigError('Training needs at least one image pair')
    steps = cfg.train.steps if steps is None else steps
    params = params or ModelParams(cfg.fusion)
    state = state or AdamState(lr=cfg.train.lr)
    state.lr = cfg.train.lr
    rng = np.random.default_rng([cfg.fusion.seed, state.step])
    trace = LossTrace()
    for _ in range(steps):
        a, b = sample_batch(pairs, cfg.train.batch_size, cfg.train.patch_size, rng)
        report = train_step(params, state, a, b, cfg)
        trace.append(state.step, report)
        if on_step is not None:
            on_step(state.step, report)
    return params, trace, state
