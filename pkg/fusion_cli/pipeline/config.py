"""
Run configuration: plain key=value text, one entry per line, '#' comments.

Values are parsed by the type of their default; unknown keys are rejected.
"""
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional

from ..errors import ConfigError

TASK_AGGREGATION = {'ivf': 'max', 'mef': 'mean', 'mff': 'max', 'mif': 'max'}
AGGREGATIONS = ('max', 'mean')
SCANS = ('2d', '1d')
WAVELET_LENGTHS = (2, 4)
TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')


def parse_value(key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in TRUE_WORDS:
                return True
            if raw.lower() in FALSE_WORDS:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError('Cannot parse {}={} as {}'.format(key, raw, type(default).__name__))
    return raw


def format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


class ConfigSection(object):
    """
    Attributes named by DEFAULTS, each holding a value of its default's type.
    """
    DEFAULTS = OrderedDict()  # type: Dict[str, object]

    def __init__(self, **overrides):
        for key, value in self.DEFAULTS.items():
            setattr(self, key, value)
        self.update(overrides)

    def update(self, values: Dict[str, object]):
        for key, value in values.items():
            if key not in self.DEFAULTS:
                raise ConfigError('Unknown {} key: {}'.format(type(self).__name__, key))
            if isinstance(value, str) and not isinstance(self.DEFAULTS[key], str):
                value = parse_value(key, value, self.DEFAULTS[key])
            setattr(self, key, value)
        self.validate()

    def validate(self):
        pass

    def items(self) -> List:
        return [(key, getattr(self, key)) for key in self.DEFAULTS]

    def describe(self) -> List[str]:
        return ['{}={}'.format(key, format_value(value)) for key, value in self.items()]

    def __eq__(self, other):
        return type(self) is type(other) and self.items() == other.items()

    def __repr__(self):
        return '{}({})'.format(type(self).__name__, ', '.join(self.describe()))


class FusionConfig(ConfigSection):
    """
    Architecture, loss weights, ablation switches and the seed.

    c_prime = 0 resolves to twice the model depth.
    """
    DEFAULTS = OrderedDict([
        ('channels', 64),
        ('n1', 2),
        ('n2', 4),
        ('mlp_ratio', 2),
        ('wavelet_length', 2),
        ('c_prime', 0),
        ('groups', 1),
        ('state_dim', 16),
        ('mu1', 10.0),
        ('mu2', 20.0),
        ('mu3', 20.0),
        ('task', 'ivf'),
        ('aggregation', ''),
        ('k_sharp', 50.0),
        ('adaptive_wavelet', True),
        ('enhance', True),
        ('spatial_branch', True),
        ('freq_branch', True),
        ('scan', '2d'),
        ('seed', 0),
    ])

    def validate(self):
        for key in ('channels', 'n1', 'n2', 'mlp_ratio', 'groups', 'state_dim'):
            if getattr(self, key) < 1:
                raise ConfigError('{} must be positive but is {}'.format(key, getattr(self, key)))
        if self.channels % 2:
            raise ConfigError('channels must be even but is {}'.format(self.channels))
        if self.c_prime < 0 or self.resolved_c_prime % self.groups:
            raise ConfigError('c_prime={} is not divisible into {} groups'.format(self.resolved_c_prime, self.groups))
        if self.wavelet_length not in WAVELET_LENGTHS:
            raise ConfigError('wavelet_length must be one of {} but is {}'.format(WAVELET_LENGTHS, self.wavelet_length))
        for key in ('mu1', 'mu2', 'mu3', 'k_sharp'):
            if getattr(self, key) <= 0:
                raise ConfigError('{} must be positive but is {}'.format(key, getattr(self, key)))
        if self.task not in TASK_AGGREGATION:
            raise ConfigError('task must be one of {} but is {}'.format(sorted(TASK_AGGREGATION), self.task))
        if self.aggregation and self.aggregation not in AGGREGATIONS:
            raise ConfigError('aggregation must be one of {} but is {}'.format(AGGREGATIONS, self.aggregation))
        if self.scan not in SCANS:
            raise ConfigError('scan must be one of {} but is {}'.format(SCANS, self.scan))

    @property
    def resolved_c_prime(self) -> int:
        return self.c_prime or 2 * self.channels

    @property
    def intensity_mode(self) -> str:
        return self.aggregation or TASK_AGGREGATION[self.task]

    @staticmethod
    def micro(**overrides) -> 'FusionConfig':
        values = dict(channels=4, n1=1, n2=1, wavelet_length=2)
        values.update(overrides)
        return FusionConfig(**values)


class TrainConfig(ConfigSection):
    DEFAULTS = OrderedDict([
        ('steps', 200),
        ('lr', 1e-4),
        ('batch_size', 2),
        ('patch_size', 64),
        ('log_every', 10),
    ])

    def validate(self):
        if self.steps < 0:
            raise ConfigError('steps must be >= 0 but is {}'.format(self.steps))
        for key in ('batch_size', 'log_every'):
            if getattr(self, key) < 1:
                raise ConfigError('{} must be positive but is {}'.format(key, getattr(self, key)))
        if self.patch_size < 4 or self.patch_size % 4:
            raise ConfigError('patch_size must be a positive multiple of 4 but is {}'.format(self.patch_size))
        if self.lr <= 0:
            raise ConfigError('lr must be positive but is {}'.format(self.lr))


class RunConfig(object):
    """
    Model and training sections resolved from one key=value source.
    """

    def __init__(self, fusion: Optional[FusionConfig] = None, train: Optional[TrainConfig] = None):
        self.fusion = fusion or FusionConfig()
        self.train = train or TrainConfig()

    @staticmethod
    def from_pairs(pairs: Dict[str, str]) -> 'RunConfig':
        fusion_values = {}
        train_values = {}
        for key, value in pairs.items():
            if key in FusionConfig.DEFAULTS:
                fusion_values[key] = value
            elif key in TrainConfig.DEFAULTS:
                train_values[key] = value
            else:
                raise ConfigError('Unknown configuration key: {}'.format(key))
        return RunConfig(FusionConfig(**fusion_values), TrainConfig(**train_values))

    def describe(self) -> List[str]:
        return self.fusion.describe() + self.train.describe()

    def __repr__(self):
        return 'RunConfig({}, {})'.format(self.fusion, self.train)


def parse_config_lines(lines: Iterable[str]) -> Dict[str, str]:
    pairs = OrderedDict()
    for number, line in enumerate(lines, start=1):
        text = line.split('#', 1)[0].strip()
        if not text:
            continue
        if '=' not in text:
            raise ConfigError('Line {}: expected key=value but found "{}"'.format(number, text))
        key, value = text.split('=', 1)
        pairs[key.strip()] = value.strip()
    return pairs


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    pairs = OrderedDict()
    if path is not None:
        try:
            with open(path, 'r') as stream:
                pairs.update(parse_config_lines(stream))
        except OSError as error:
            raise ConfigError('Cannot read config file {}: {}'.format(path, error))
    pairs.update(overrides or {})
    return RunConfig.from_pairs(pairs)
